use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{Csr, LinearOp};
use crate::spatial::{Boundary, ReducedOperator, SpatialOperator, StencilKind};
use crate::timeloop::{Jacobian, System};

use super::{ErrorMetric, Problem};

/// Conservative Burgers semi-discretization on the free nodes:
/// M1' u' = −M2' (u²/2) − B (g²/2), where g holds the pinned boundary values.
pub struct BurgersSystem {
    pub reduced: ReducedOperator,
    boundary_flux: Vec<f64>,
}

impl BurgersSystem {
    pub fn new(op: &SpatialOperator, pinned: &[usize], values: &[f64]) -> Result<Self> {
        let reduced = op.reduce(pinned)?;
        // `reduce` sorts the pinned list; look the values up by node
        let g: Vec<f64> =
            reduced.pinned.iter().map(|p| values[pinned.iter().position(|q| q == p).expect("pinned node")]).collect();
        let flux: Vec<f64> = g.iter().map(|v| 0.5 * v * v).collect();
        let boundary_flux = reduced.boundary_term(&flux).into_iter().map(|v| -v).collect();
        Ok(Self { reduced, boundary_flux })
    }
}

impl System for BurgersSystem {
    fn dim(&self) -> usize {
        self.reduced.free.len()
    }

    fn mass(&self) -> Option<&Csr> {
        Some(&self.reduced.m1)
    }

    fn rhs(&self, _t: f64, u: &[f64], out: &mut [f64]) {
        let f: Vec<f64> = u.iter().map(|v| 0.5 * v * v).collect();
        self.reduced.m2.apply(&f, out);
        for (o, b) in out.iter_mut().zip(&self.boundary_flux) {
            *o = b - *o;
        }
    }

    fn jacobian(&self, _t: f64, u: &[f64]) -> Jacobian<'_> {
        Jacobian::Sparse(Cow::Owned(self.reduced.m2.mul_diag_right(u).scaled(-1.0)))
    }

    fn is_linear(&self) -> bool {
        false
    }
}

/// Shock diagnostics at one time.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShockReport {
    pub t: f64,
    /// Position where the computed profile last falls through 1/2.
    pub midpoint: f64,
    pub exact_midpoint: f64,
    /// Largest excursion outside [0, 1] and where it occurs.
    pub overshoot: f64,
    pub overshoot_x: f64,
    /// ∫|u − u_exact| dx outside the window around the exact midpoint.
    pub l1_outside: f64,
    pub window: f64,
}

impl ShockReport {
    pub fn midpoint_error(&self) -> f64 {
        (self.midpoint - self.exact_midpoint).abs()
    }

    pub fn overshoot_offset(&self) -> f64 {
        (self.overshoot_x - self.exact_midpoint).abs()
    }
}

/// u_t + (u²/2)_x = 0 on [0, 5] with the ramp datum 1 → 0 over [1.5, 2.5], u = 1 held at
/// the left end and 0 at the right.
pub struct Burgers {
    pub op: SpatialOperator,
    pub t_end: f64,
    /// Half-width of the window excluded from the L¹ error.
    pub window: f64,
    sys: BurgersSystem,
}

impl Burgers {
    pub fn new(kind: StencilKind, n: usize) -> Result<Self> {
        let h = 5.0 / (n - 1) as f64;
        let op = SpatialOperator::build(kind, n, h, Boundary::Closed)?;
        let sys = BurgersSystem::new(&op, &[0, n - 1], &[1.0, 0.0])?;
        Ok(Self { op, t_end: 0.9, window: 0.05, sys })
    }

    /// Lele6 with Δx = 0.005.
    pub fn problem5() -> Result<Self> {
        Self::new(StencilKind::Lele6, 1001)
    }

    pub fn initial_profile(x: f64) -> f64 {
        if x <= 1.5 {
            1.0
        } else if x <= 2.5 {
            2.5 - x
        } else {
            0.0
        }
    }

    /// Characteristics solution: the ramp steepens until t = 1, after which a shock
    /// moves right at speed 1/2.
    pub fn exact_at(x: f64, t: f64) -> f64 {
        if t < 1.0 {
            if x <= 1.5 + t {
                1.0
            } else if x <= 2.5 {
                (2.5 - x) / (1.0 - t)
            } else {
                0.0
            }
        } else if x < 2.5 + 0.5 * (t - 1.0) {
            1.0
        } else {
            0.0
        }
    }

    /// Where the exact profile equals 1/2.
    pub fn exact_midpoint(t: f64) -> f64 {
        if t < 1.0 {
            2.5 - 0.5 * (1.0 - t)
        } else {
            2.5 + 0.5 * (t - 1.0)
        }
    }

    /// Nodal values, boundary nodes included.
    pub fn full_state(&self, u: &[f64]) -> Vec<f64> {
        self.sys.reduced.scatter(u, &[1.0, 0.0], self.op.n)
    }

    pub fn shock_report(&self, u: &[f64], t: f64) -> ShockReport {
        let full = self.full_state(u);
        let x = self.op.grid();
        let xs = Self::exact_midpoint(t);
        let mut midpoint = f64::NAN;
        for i in (0..full.len() - 1).rev() {
            if full[i] >= 0.5 && full[i + 1] < 0.5 {
                let s = (full[i] - 0.5) / (full[i] - full[i + 1]);
                midpoint = x[i] + s * (x[i + 1] - x[i]);
                break;
            }
        }
        let (mut overshoot, mut overshoot_x) = (0.0, xs);
        for (i, &v) in full.iter().enumerate() {
            let e = (v - 1.0).max(-v);
            if e > overshoot {
                overshoot = e;
                overshoot_x = x[i];
            }
        }
        let l1_outside = full
            .iter()
            .zip(&x)
            .filter(|(_, &xi)| (xi - xs).abs() > self.window)
            .map(|(&v, &xi)| (v - Self::exact_at(xi, t)).abs() * self.op.h)
            .sum();
        ShockReport { t, midpoint, exact_midpoint: xs, overshoot, overshoot_x, l1_outside, window: self.window }
    }
}

impl Problem for Burgers {
    fn name(&self) -> String {
        "problem5".into()
    }

    fn system(&self) -> &dyn System {
        &self.sys
    }

    fn initial(&self) -> Vec<f64> {
        self.exact(0.0)
    }

    fn exact(&self, t: f64) -> Vec<f64> {
        self.sys.reduced.free.iter().map(|&i| Self::exact_at(self.op.x(i), t)).collect()
    }

    fn metric(&self) -> ErrorMetric {
        ErrorMetric::L1
    }

    fn t_end(&self) -> f64 {
        self.t_end
    }

    /// dt = N_c Δx / max|u0| with max|u0| = 1.
    fn dt_from_cfl(&self, nc: f64) -> Option<f64> {
        Some(nc * self.op.h)
    }

    /// L¹ error away from the shock window.
    fn error(&self, u: &[f64], t: f64) -> f64 {
        self.shock_report(u, t).l1_outside
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeloop::check_linearity;

    #[test]
    fn characteristics_solution() {
        assert_eq!(Burgers::exact_at(2.0, 0.0), 0.5);
        assert!((Burgers::exact_at(2.45, 0.9) - 0.5).abs() < 1e-12);
        assert_eq!(Burgers::exact_at(2.3, 0.9), 1.0);
        assert!((Burgers::exact_midpoint(0.9) - 2.45).abs() < 1e-12);
        for i in 0..=50 {
            let x = 0.1 * i as f64;
            assert_eq!(Burgers::exact_at(x, 0.0), Burgers::initial_profile(x));
        }
    }

    #[test]
    fn exact_solution_satisfies_the_pde_in_smooth_regions() {
        let e = 1e-6;
        let f = |x: f64, t: f64| Burgers::exact_at(x, t);
        for i in 0..20 {
            let t = 0.04 * i as f64 + 0.01;
            // inside the ramp
            let x = 1.5 + t + 0.5 * (1.0 - t);
            let ut = (f(x, t + e) - f(x, t - e)) / (2.0 * e);
            let ux = (f(x + e, t) - f(x - e, t)) / (2.0 * e);
            assert!((ut + f(x, t) * ux).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn initial_state_is_exact_and_system_is_nonlinear() {
        let p = Burgers::new(StencilKind::Lele6, 201).unwrap();
        assert_eq!(p.error(&p.initial(), 0.0), 0.0);
        let u: Vec<f64> = p.initial();
        let v: Vec<f64> = u.iter().map(|x| 0.3 * x).collect();
        assert!(check_linearity(p.system(), 0.0, &u, &v) > 1e-3);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = Burgers::new(StencilKind::Lele6, 41).unwrap();
        let sys = p.system();
        let n = sys.dim();
        let u: Vec<f64> = (0..n).map(|i| (0.3 * i as f64).sin()).collect();
        let jac = sys.jacobian(0.0, &u);
        let mut base = vec![0.0; n];
        sys.rhs(0.0, &u, &mut base);
        let eps = 1e-7;
        for j in [0, 7, n - 1] {
            let mut up = u.clone();
            up[j] += eps;
            let mut out = vec![0.0; n];
            sys.rhs(0.0, &up, &mut out);
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let mut col = vec![0.0; n];
            jac.as_op().apply(&e, &mut col);
            for i in 0..n {
                assert!(((out[i] - base[i]) / eps - col[i]).abs() < 1e-4 * (1.0 + col[i].abs()));
            }
        }
    }

    #[test]
    fn constant_state_matching_the_boundary_is_steady() {
        let op = SpatialOperator::build(StencilKind::Lele6, 51, 0.1, Boundary::Closed).unwrap();
        let sys = BurgersSystem::new(&op, &[0, 50], &[0.7, 0.7]).unwrap();
        let u = vec![0.7; 49];
        let mut out = vec![0.0; 49];
        sys.rhs(0.0, &u, &mut out);
        assert!(out.iter().all(|v| v.abs() < 1e-12));
    }
}
