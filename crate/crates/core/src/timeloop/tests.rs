use std::borrow::Cow;

use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::butcher::builtin_scheme;
use crate::spectral::amplification;

fn rotation(lambda: f64) -> LinearOde {
    LinearOde::new(Csr::from_rows(2, vec![vec![(1, -lambda)], vec![(0, lambda)]]))
}

/// u' = −u³ (nonlinear scalar), exact u0 / √(1 + 2 u0² t).
struct Cubic;

impl System for Cubic {
    fn dim(&self) -> usize {
        1
    }
    fn rhs(&self, _t: f64, u: &[f64], out: &mut [f64]) {
        out[0] = -u[0].powi(3);
    }
    fn jacobian(&self, _t: f64, u: &[f64]) -> Jacobian<'_> {
        Jacobian::Sparse(Cow::Owned(Csr::from_rows(1, vec![vec![(0, -3.0 * u[0] * u[0])]])))
    }
    fn is_linear(&self) -> bool {
        false
    }
}

#[test]
fn zero_rhs_leaves_state_unchanged() {
    let sys = LinearOde::new(Csr::from_rows(1, vec![vec![]]));
    for name in ["IRK24", "S3B2", "BE"] {
        let tab = builtin_scheme(name).unwrap();
        let (u, _) = Integrator::new(&sys, &tab, StepOptions::default()).step(0.0, &[3.5], 0.7).unwrap();
        assert_eq!(u, vec![3.5]);
    }
}

#[test]
fn backward_euler_halves_decay_at_unit_step() {
    let sys = LinearOde::new(Csr::from_rows(1, vec![vec![(0, -1.0)]]));
    let tab = builtin_scheme("BE").unwrap();
    let (u, _) = Integrator::new(&sys, &tab, StepOptions::default()).step(0.0, &[2.0], 1.0).unwrap();
    assert!((u[0] - 1.0).abs() < 1e-15);
}

#[test]
fn one_step_of_rotation_applies_the_amplification_factor() {
    let lambda = 10.0;
    let sys = rotation(lambda);
    for name in ["IRK24", "IRK36", "S2A1", "S3C1"] {
        let tab = builtin_scheme(name).unwrap();
        let dt = 0.05;
        let (u, _) = Integrator::new(&sys, &tab, StepOptions::default()).step(0.0, &[0.3, -0.4], dt).unwrap();
        let z = amplification(&tab, lambda * dt).unwrap() * Complex64::new(0.3, -0.4);
        assert!((u[0] - z.re).abs() < 1e-14 && (u[1] - z.im).abs() < 1e-14, "{name}");
    }
}

#[test]
fn forcing_enters_at_stage_times() {
    // u' = cos t, exact sin t; Gauss methods integrate this quadrature to high order
    let sys = LinearOde::new(Csr::from_rows(1, vec![vec![]])).with_forcing(|t, f| f[0] = t.cos());
    let tab = builtin_scheme("IRK36").unwrap();
    let (u, _) = integrate(&sys, &tab, &[0.0], 0.0, 1.0, 0.25, StepOptions::default(), None).unwrap();
    // composite three-point Gauss quadrature error at h = 1/4 is about 1e-10
    assert!((u[0] - 1f64.sin()).abs() < 1e-9);
}

#[test]
fn newton_matches_direct_on_linear_systems() {
    let sys = rotation(10.0).with_forcing(|t, f| {
        f[0] = t.sin();
        f[1] = 0.5;
    });
    let tab = builtin_scheme("S3B1").unwrap();
    let mut direct = Integrator::new(&sys, &tab, StepOptions::default());
    let (fd, _) = direct.linear_stages(0.3, &[1.0, 0.2], 0.1).unwrap();
    let mut newton = Integrator::new(&sys, &tab, StepOptions::default());
    let (fnw, stats) = newton.newton_stages(0.3, &[1.0, 0.2], 0.1).unwrap();
    assert!(stats.newton_iterations <= 1);
    for (a, b) in fd.iter().zip(&fnw) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn krylov_matches_direct() {
    let n = 40;
    let k = Csr::from_rows(
        n,
        (0..n)
            .map(|i| vec![((i + 1) % n, -2.0), ((i + n - 1) % n, 2.0), ((i + 2) % n, 0.3), ((i + n - 2) % n, -0.3)])
            .collect(),
    );
    let sys = LinearOde::new(k);
    let tab = builtin_scheme("IRK36").unwrap();
    let u0: Vec<f64> = (0..n).map(|i| (-(i as f64 - 20.0).powi(2) / 10.0).exp()).collect();
    let (a, _) = integrate(&sys, &tab, &u0, 0.0, 1.0, 0.1, StepOptions::default(), None).unwrap();
    let opts = StepOptions { solver: SolverKind::Krylov, ..Default::default() };
    let (b, rep) = integrate(&sys, &tab, &u0, 0.0, 1.0, 0.1, opts, None).unwrap();
    assert!(rep.max_linear_residual <= 1e-11);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn mass_form_matches_explicit_inverse() {
    // M u' = K u with M = tridiag(1/4, 1, 1/4) periodic
    let n = 12;
    let m = Csr::from_rows(n, (0..n).map(|i| vec![((i + n - 1) % n, 0.25), (i, 1.0), ((i + 1) % n, 0.25)]).collect());
    let k = Csr::from_rows(n, (0..n).map(|i| vec![((i + 1) % n, 1.0), ((i + n - 1) % n, -1.0)]).collect());
    let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| m.get(i, j));
    let dk = nalgebra::DMatrix::from_fn(n, n, |i, j| k.get(i, j));
    let c = dm.try_inverse().unwrap() * dk;
    let explicit = Csr::from_rows(n, (0..n).map(|i| (0..n).map(|j| (j, c[(i, j)])).collect()).collect());
    let tab = builtin_scheme("S2B1").unwrap();
    let u0: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
    let (a, _) =
        integrate(&LinearOde::new(k).with_mass(m), &tab, &u0, 0.0, 2.0, 0.25, StepOptions::default(), None).unwrap();
    let (b, _) = integrate(&LinearOde::new(explicit), &tab, &u0, 0.0, 2.0, 0.25, StepOptions::default(), None).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn zero_dissipation_schemes_preserve_norm() {
    let sys = rotation(10.0);
    // tableaux in closed form; tabulated ten-digit rows leave |G| − 1 near 1e-13 per step
    for name in ["IRK24", "IRK36", "S2B1"] {
        let tab = builtin_scheme(name).unwrap();
        let (u, _) = integrate(&sys, &tab, &[1.0, 0.0], 0.0, 80.0, 0.008, StepOptions::default(), None).unwrap();
        let norm = (u[0] * u[0] + u[1] * u[1]).sqrt();
        assert!((norm - 1.0).abs() < 1e-10, "{name}: {norm}");
    }
}

#[test]
fn nonlinear_gauss_converges_at_order_four() {
    let tab = builtin_scheme("IRK24").unwrap();
    let rows = convergence_study(&[0.05, 0.025], |dt| {
        let (u, rep) = integrate(&Cubic, &tab, &[1.0], 0.0, 2.0, dt, StepOptions::default(), None)?;
        assert!(rep.newton_iterations.iter().all(|&k| k >= 1 && k < 10));
        Ok((u[0] - 1.0 / 5f64.sqrt()).abs())
    })
    .unwrap();
    let rate = rows[1].rate.unwrap();
    assert!((rate - 4.0).abs() < 0.2, "{rows:?}");
}

#[test]
fn step_counting() {
    assert_eq!(step_count(0.0, 0.768, 0.016, StepPolicy::Exact).unwrap(), 48);
    assert!(step_count(0.0, 20.0, 0.075, StepPolicy::Exact).is_err());
    assert_eq!(step_count(0.0, 20.0, 0.075, StepPolicy::Cover).unwrap(), 267);
    assert_eq!(step_count(1.0, 1.0, 0.1, StepPolicy::Exact).unwrap(), 0);
}

#[test]
fn zero_steps_return_initial_state() {
    let tab = builtin_scheme("IRK24").unwrap();
    let (u, rep) = integrate(&rotation(1.0), &tab, &[0.25, 0.5], 2.0, 2.0, 0.1, StepOptions::default(), None).unwrap();
    assert_eq!(u, vec![0.25, 0.5]);
    assert_eq!(rep.steps, 0);
}

#[test]
fn identical_step_sizes_give_zero_rate() {
    let rows = convergence_study(&[0.1, 0.1], |_| Ok(1e-3)).unwrap();
    assert_eq!(rows[1].rate, Some(0.0));
    assert_eq!(rows[0].rate, None);
}

#[test]
fn recorder_sees_every_step() {
    let tab = builtin_scheme("IRK24").unwrap();
    let mut times = Vec::new();
    let mut rec = |t: f64, _: &[f64]| times.push(t);
    integrate(&rotation(1.0), &tab, &[1.0, 0.0], 0.0, 0.5, 0.1, StepOptions::default(), Some(&mut rec)).unwrap();
    assert_eq!(times.len(), 5);
    assert!((times[4] - 0.5).abs() < 1e-15);
}

proptest! {
    #[test]
    fn affine_systems_pass_the_linearity_check(vals in proptest::collection::vec(-2.0f64..2.0, 9), u in proptest::collection::vec(-1.0f64..1.0, 6)) {
        let k = Csr::from_rows(3, (0..3).map(|i| (0..3).map(|j| (j, vals[3 * i + j])).collect()).collect());
        let sys = LinearOde::new(k).with_forcing(|t, f| f.iter_mut().for_each(|v| *v = t.exp()));
        prop_assert!(check_linearity(&sys, 0.4, &u[..3], &u[3..]) < 1e-12);
    }

    #[test]
    fn newton_and_direct_agree(vals in proptest::collection::vec(-3.0f64..3.0, 9), u in proptest::collection::vec(-1.0f64..1.0, 3), dt in 0.01f64..0.3) {
        let k = Csr::from_rows(3, (0..3).map(|i| (0..3).map(|j| (j, vals[3 * i + j])).collect()).collect());
        let sys = LinearOde::new(k);
        let tab = builtin_scheme("IRK36").unwrap();
        let a = Integrator::new(&sys, &tab, StepOptions::default()).linear_stages(0.0, &u, dt);
        prop_assume!(a.is_ok());
        let (fa, _) = a.unwrap();
        let (fb, _) = Integrator::new(&sys, &tab, StepOptions::default()).newton_stages(0.0, &u, dt).unwrap();
        let scale = 1.0 + norm_inf(&fa);
        for (x, y) in fa.iter().zip(&fb) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }
}
