//! Acceptance suite: one pass/fail line per criterion, each at its stated tolerance.
//! Runs as a plain binary so the report is printed uncaptured.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use irkwave::butcher::{builtin_scheme, order_of_accuracy, registry, ButcherTableau};
use irkwave::linalg::Csr;
use irkwave::optimizer::{rederive, Alpha, Family, WeightedObjective};
use irkwave::problems::reference::table;
use irkwave::problems::reproduce::{
    burgers_checks, burgers_run, run_table, table_checks, verify_columns, Check, ReproOptions, Tolerances,
    BURGERS_SCHEMES,
};
use irkwave::problems::{Problem, Rotation};
use irkwave::quadrature::CompositeRule;
use irkwave::spatial::{group_velocity_reversal, velocity_map, Boundary, SpatialOperator, StencilKind};
use irkwave::spectral::{
    amplification, crossover, dispersion_norm, dispersion_norm_with, max_dissipation, phase_error_dd,
    phi_three_stage_dd, phi_two_stage_dd,
};
use irkwave::timeloop::{integrate, Integrator, Jacobian, LinearOde, StepOptions, System};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Outcome = (bool, String);

fn tab(name: &str) -> ButcherTableau {
    builtin_scheme(name).expect("registry scheme")
}

fn published_schemes() -> Vec<&'static ButcherTableau> {
    registry().iter().filter(|s| s.alpha.is_some()).map(|s| &s.tableau).collect()
}

fn summarize(checks: &[Check]) -> Outcome {
    let failed: Vec<String> =
        checks.iter().filter(|c| !c.passed).map(|c| format!("{} ({})", c.name, c.detail)).collect();
    let ok = failed.is_empty() && !checks.is_empty();
    let mut detail = format!("{}/{} checks pass", checks.len() - failed.len(), checks.len());
    if !failed.is_empty() {
        detail.push_str("; failing: ");
        detail.push_str(&failed.join("; "));
    }
    (ok, detail)
}

fn tables(numbers: &[u32]) -> Vec<Check> {
    let opts = ReproOptions::default();
    let mut out = Vec::new();
    for &n in numbers {
        let t = table(n).expect("table");
        match run_table(t, &verify_columns(t), &opts).and_then(|cells| table_checks(n, &cells, &Tolerances::PAPER)) {
            Ok(c) => out.extend(c),
            Err(e) => out.push(Check {
                name: format!("table {n}"),
                rule: "runs".into(),
                passed: false,
                detail: e.to_string(),
            }),
        }
    }
    out
}

fn c1_orders() -> Outcome {
    let clock = Instant::now();
    let expected = [
        ("S2A1", 2),
        ("S2B1", 2),
        ("S2C1", 2),
        ("S2D1", 3),
        ("IRK24", 4),
        ("S3A1", 4),
        ("S3B1", 4),
        ("S3C1", 4),
        ("S3D1", 4),
        ("S3D2", 6),
        ("IRK36", 6),
    ];
    let mut bad = Vec::new();
    for (name, p) in expected {
        let got = order_of_accuracy(&tab(name), 1e-9);
        if got != p {
            bad.push(format!("{name} {got} (expected {p})"));
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    let ok = bad.is_empty() && secs < 1.0;
    (ok, format!("{} schemes, {secs:.3} s; mismatches: [{}]", expected.len(), bad.join(", ")))
}

fn c2_optima() -> Outcome {
    let clock = Instant::now();
    let cases = [
        (Family::TwoStage, 0.0, -0.0952154410),
        (Family::TwoStage, 4.0, -0.0839362135),
        (Family::TwoStage, 16.0, -0.0834849563),
        (Family::ThreeStage, 0.0, 0.1010711100),
        (Family::ThreeStage, 4.0, 0.1000815539),
        (Family::ThreeStage, 16.0, 0.1000204444),
    ];
    let mut worst: f64 = 0.0;
    let mut failed = false;
    for (f, a, v) in cases {
        match WeightedObjective::new(f, Alpha::Finite(a)).minimize_param() {
            Ok(p) => worst = worst.max((p - v).abs()),
            Err(_) => failed = true,
        }
    }
    let y = WeightedObjective::new(Family::TwoStage, Alpha::Asymptotic).minimize_param();
    let x = WeightedObjective::new(Family::ThreeStage, Alpha::Asymptotic).minimize_param();
    let exact = matches!((&y, &x), (Ok(y), Ok(x)) if *y == -1.0 / 12.0 && *x == 0.1);
    let secs = clock.elapsed().as_secs_f64();
    let ok = !failed && worst <= 1e-8 && exact && secs < 10.0;
    (ok, format!("max deviation {worst:.2e}, asymptotic exact: {exact}, {secs:.2} s"))
}

fn c3_norms() -> Outcome {
    let cases = [
        ("S2A1", 4.238151e-2),
        ("S2B1", 1.274510e-1),
        ("S2C1", 1.319268e-1),
        ("S2D1", 1.334335e-1),
        ("S3A1", 1.781038e-3),
        ("S3B1", 8.878927e-3),
        ("S3C1", 9.400444e-3),
        ("S3D1", 9.575026e-3),
    ];
    let mut worst: (f64, &str) = (0.0, "");
    for (name, v) in cases {
        let d = dispersion_norm(&tab(name)).map_or(f64::INFINITY, |n| (n - v).abs());
        if d > worst.0 {
            worst = (d, name);
        }
    }
    (worst.0 <= 1e-5, format!("max |Δφ| = {:.2e} ({})", worst.0, worst.1))
}

fn c4_dissipation() -> Outcome {
    let schemes = published_schemes();
    let mut worst: (f64, &str) = (0.0, "");
    for t in &schemes {
        let m = max_dissipation(t, 1024).unwrap_or(f64::INFINITY);
        if m > worst.0 {
            worst = (m, t.name());
        }
    }
    (worst.0 <= 1e-9, format!("{} schemes, max |1-|G|| = {:.2e} ({})", schemes.len(), worst.0, worst.1))
}

fn c5_crossovers() -> Outcome {
    let cases = [
        ("S2A1", "S2D1", 1.979),
        ("S2B1", "S2D1", 0.465),
        ("S2C1", "S2D1", 0.223),
        ("S3A1", "S3D1", 2.073),
        ("S3B1", "S3D1", 0.584),
        ("S3C1", "S3D1", 0.293),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, b, v) in cases {
        let got = crossover(&tab(a), &tab(b)).ok().flatten();
        let pass = got.is_some_and(|s| (s - v).abs() <= 0.01);
        ok &= pass;
        parts.push(format!("{a}/{b} {} (expected {v})", got.map_or("none".into(), |s| format!("{s:.4}"))));
    }
    (ok, parts.join(", "))
}

fn c6_rederivation() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_irkwavelab");
    let base = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance_optimize");
    let _ = std::fs::remove_dir_all(&base);
    std::fs::create_dir_all(&base).expect("temp dir");
    let mut worst: (f64, String) = (0.0, String::new());
    let mut count = 0;
    for info in registry().iter().filter(|s| s.alpha.is_some()) {
        let name = info.tableau.name();
        let dir = base.join(name);
        let closures = base.join(format!("{name}.txt"));
        std::fs::write(&closures, info.closures.expect("closures")).expect("write closures");
        let status = Command::new(bin)
            .args(["optimize", "--family", &info.tableau.stages().to_string(), "--alpha"])
            .arg(info.alpha.expect("alpha").to_string())
            .arg("--closures")
            .arg(&closures)
            .args(["--reference", name, "--output-dir"])
            .arg(&dir)
            .output()
            .expect("run irkwavelab");
        count += 1;
        let derived = status.status.success().then(|| ButcherTableau::read(&dir.join("tableau.json")).ok()).flatten();
        let dev = match derived {
            Some(d) => {
                let a = d.a_flat().iter().zip(info.tableau.a_flat()).map(|(x, y)| (x - y).abs());
                let b = d.b().iter().zip(info.tableau.b()).map(|(x, y)| (x - y).abs());
                a.chain(b).fold(0.0, f64::max)
            }
            None => f64::INFINITY,
        };
        if dev > worst.0 || worst.1.is_empty() {
            worst = (dev, name.to_string());
        }
    }
    (worst.0 <= 1e-8, format!("{count} coefficient sets, max deviation {:.2e} ({})", worst.0, worst.1))
}

fn c7_series() -> Outcome {
    let (s1, s2) = (1e-3, 2e-3);
    let mut worst: (f64, &str) = (0.0, "");
    let mut tableau_worst: (f64, &str) = (0.0, "");
    for name in ["S2A1", "S2B1", "S2C1", "S3A1", "S3B1", "S3C1"] {
        let t = tab(name);
        let (p, expected, phi): (i32, f64, Box<dyn Fn(f64) -> f64>) = match (t.y_param(), t.x_param()) {
            (Some(y), _) => (3, y + 1.0 / 12.0, Box::new(move |s| phi_two_stage_dd(y, s))),
            (_, Some(x)) => (5, (1.0 - 10.0 * x) / 120.0, Box::new(move |s| phi_three_stage_dd(x, s))),
            _ => return (false, format!("{name} has no family parameter")),
        };
        // φ/σ^p = c_p + c_{p+2} σ² + …; one Richardson step removes the σ² term
        let lead = |f: &dyn Fn(f64) -> f64| (4.0 * f(s1) / s1.powi(p) - f(s2) / s2.powi(p)) / 3.0;
        let rel = ((lead(&*phi) - expected) / expected).abs();
        if rel > worst.0 {
            worst = (rel, name);
        }
        // the same estimate from the stored coefficients, for the record
        let rel = ((lead(&|s| phase_error_dd(&t, s)) - expected) / expected).abs();
        if rel > tableau_worst.0 {
            tableau_worst = (rel, name);
        }
    }
    (
        worst.0 <= 1e-3,
        format!(
            "max relative deviation {:.2e} ({}); from stored coefficients {:.2e} ({})",
            worst.0, worst.1, tableau_worst.0, tableau_worst.1
        ),
    )
}

fn c12_burgers() -> Outcome {
    let mut checks = Vec::new();
    for s in BURGERS_SCHEMES {
        match burgers_run(s) {
            Ok(r) => checks.extend(burgers_checks(s, &r)),
            Err(e) => checks.push(Check { name: s.into(), rule: "runs".into(), passed: false, detail: e.to_string() }),
        }
    }
    summarize(&checks)
}

fn c14_maps() -> Outcome {
    let irk24 = tab("IRK24");
    let mut parts = Vec::new();
    let mut ok = true;
    for (kind, v) in [(StencilKind::Lele6, 2.27), (StencilKind::Cd6, 1.94)] {
        let op = SpatialOperator::build(kind, 501, 1.0, Boundary::Closed).expect("operator");
        let got = group_velocity_reversal(&op, &irk24, 1.0, 250, 400).ok().flatten();
        let pass = got.is_some_and(|k| (k - v).abs() <= 0.03);
        ok &= pass;
        parts.push(format!("{kind} kh = {}", got.map_or("none".into(), |k| format!("{k:.4}"))));
    }
    let op = SpatialOperator::build(StencilKind::Lele6, 501, 1.0, Boundary::Closed).expect("operator");
    let nc: Vec<f64> = (1..=12).map(|i| 0.25 * i as f64).collect();
    let kh: Vec<f64> = (1..=62).map(|i| 0.05 * i as f64).collect();
    let reference = velocity_map(&op, &irk24, &nc, &kh, 250).expect("map");
    let diff = |t: &ButcherTableau| -> f64 {
        let m = velocity_map(&op, t, &nc, &kh, 250).expect("map");
        let vp = m.vp.iter().flatten().zip(reference.vp.iter().flatten());
        let vg = m.vg.iter().flatten().zip(reference.vg.iter().flatten());
        vp.chain(vg).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    // the family as derived at full precision; the ten-digit printed rows are reported alongside
    let mut derived: f64 = 0.0;
    let mut printed = Vec::new();
    for name in ["S2D1", "S2D2", "S2D3"] {
        derived = derived.max(rederive(name).map_or(f64::INFINITY, |d| diff(&d.solution.tableau)));
        printed.push(format!("{name} {:.1e}", diff(&tab(name))));
    }
    ok &= derived <= 1e-10;
    parts.push(format!("S2D vs IRK24 max map difference {derived:.2e} (printed rows: {})", printed.join(", ")));
    (ok, parts.join(", "))
}

/// A linear system presented as nonlinear, so the stepper takes the Newton path.
struct AsNonlinear<'a>(&'a LinearOde);

impl System for AsNonlinear<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn rhs(&self, t: f64, u: &[f64], out: &mut [f64]) {
        self.0.rhs(t, u, out)
    }
    fn jacobian(&self, t: f64, u: &[f64]) -> Jacobian<'_> {
        self.0.jacobian(t, u)
    }
    fn is_linear(&self) -> bool {
        false
    }
}

fn c15_properties() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    let mut runner =
        TestRunner::new(Config { cases: 256, rng_seed: proptest::test_runner::RngSeed::Fixed(7), ..Config::default() });

    let conj = runner.run(&(2usize..=3, prop::collection::vec(-1.0f64..1.0, 12), 0.01f64..3.0), |(r, vals, sigma)| {
        let a: Vec<Vec<f64>> = (0..r).map(|i| vals[i * r..(i + 1) * r].to_vec()).collect();
        let b = vals[9..9 + r].to_vec();
        let t = ButcherTableau::new("random", a, b).expect("tableau");
        if let (Ok(g), Ok(h)) = (amplification(&t, sigma), amplification(&t, -sigma)) {
            prop_assert!((g.conj() - h).norm() <= 1e-12 * (1.0 + g.norm()));
            prop_assert!((g.norm() - h.norm()).abs() <= 1e-12 * (1.0 + g.norm()));
        }
        Ok(())
    });
    ok &= conj.is_ok();
    parts.push(format!("G conjugacy {}", if conj.is_ok() { "holds" } else { "fails" }));

    let rule = CompositeRule::default();
    let mut q: f64 = 0.0;
    for t in published_schemes() {
        let a = dispersion_norm_with(t, rule).unwrap_or(f64::NAN);
        let b = dispersion_norm_with(t, rule.refined()).unwrap_or(f64::NAN);
        q = if (a - b).is_nan() { f64::INFINITY } else { q.max((a - b).abs()) };
    }
    ok &= q <= 1e-9;
    parts.push(format!("quadrature refinement {q:.1e}"));

    let newton = runner.run(
        &(prop::collection::vec(-3.0f64..3.0, 9), prop::collection::vec(-1.0f64..1.0, 3), 0.01f64..0.3),
        |(vals, u, dt)| {
            let k = Csr::from_rows(3, (0..3).map(|i| (0..3).map(|j| (j, vals[3 * i + j])).collect()).collect());
            let sys = LinearOde::new(k);
            let t = tab("IRK36");
            let direct = Integrator::new(&sys, &t, StepOptions::default()).step(0.0, &u, dt);
            let Ok((a, _)) = direct else { return Ok(()) };
            let wrapped = AsNonlinear(&sys);
            let (b, _) = Integrator::new(&wrapped, &t, StepOptions::default()).step(0.0, &u, dt).expect("newton");
            let scale = 1.0 + a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-12 * scale);
            }
            Ok(())
        },
    );
    ok &= newton.is_ok();
    parts.push(format!("Newton vs direct {}", if newton.is_ok() { "agree" } else { "differ" }));

    let p = Rotation::default();
    let mut drift: f64 = 0.0;
    for name in ["IRK24", "IRK36", "S2B1"] {
        let t = tab(name);
        let steps = 10_000;
        let dt = 0.008;
        match integrate(p.system(), &t, &[1.0, 0.0], 0.0, dt * steps as f64, dt, StepOptions::default(), None) {
            Ok((u, _)) => drift = drift.max(((u[0] * u[0] + u[1] * u[1]).sqrt() - 1.0).abs()),
            Err(_) => drift = f64::INFINITY,
        }
    }
    ok &= drift <= 1e-10;
    parts.push(format!("norm drift over 1e4 steps {drift:.1e}"));
    (ok, parts.join(", "))
}

fn main() {
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "order conditions", Box::new(c1_orders)),
        (2, "optimizer optima", Box::new(c2_optima)),
        (3, "dispersion norms", Box::new(c3_norms)),
        (4, "zero dissipation", Box::new(c4_dissipation)),
        (5, "crossovers", Box::new(c5_crossovers)),
        (6, "table re-derivation", Box::new(c6_rederivation)),
        (7, "series coefficients", Box::new(c7_series)),
        (8, "problem 1 (table 9)", Box::new(|| summarize(&tables(&[9])))),
        (9, "problem 2 (table 10)", Box::new(|| summarize(&tables(&[10])))),
        (10, "problem 3 (table 11)", Box::new(|| summarize(&tables(&[11])))),
        (11, "problem 4 (table 12)", Box::new(|| summarize(&tables(&[12])))),
        (12, "problem 5 shock", Box::new(c12_burgers)),
        (13, "problem 6 reduced domain (tables 13, 14)", Box::new(|| summarize(&tables(&[13, 14])))),
        (14, "velocity maps", Box::new(c14_maps)),
        (15, "property suites", Box::new(c15_properties)),
    ];
    // optional criterion numbers on the command line select a subset
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: Vec<_> = criteria.into_iter().filter(|c| only.is_empty() || only.contains(&c.0)).collect();
    let mut failed = Vec::new();
    for (n, title, f) in &criteria {
        let clock = Instant::now();
        let (ok, detail) = f();
        println!(
            "criterion {n:>2} {} {title} [{:.1} s]: {detail}",
            if ok { "PASS" } else { "FAIL" },
            clock.elapsed().as_secs_f64()
        );
        if !ok {
            failed.push(*n);
        }
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        println!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
