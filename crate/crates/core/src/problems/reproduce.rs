//! Re-runs the benchmark tables and compares the results with the published values.

use rayon::prelude::*;
use serde::Serialize;

use super::reference::{table, Axis, Table};
use super::{
    run_problem, Burgers, Convection1d, Convection2d, ErrorMetric, ForcedOscillator, Problem, Rotation, ShockReport,
};
use crate::butcher::builtin_scheme;
use crate::error::{Error, Result};

/// Knobs for a reproduction run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReproOptions {
    /// Side of the square domain for the 2D problem; the published runs used 60.
    pub plane_side: f64,
}

impl Default for ReproOptions {
    fn default() -> Self {
        Self { plane_side: 20.0 }
    }
}

/// One (scheme, column) run.
#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub table: u32,
    pub label: String,
    pub scheme: String,
    pub column: f64,
    pub dt: f64,
    pub t_final: f64,
    pub measured: Option<f64>,
    pub published: Option<f64>,
    /// Error against the exact semi-discrete solution, where available.
    pub temporal: Option<f64>,
    pub failure: Option<String>,
}

/// A named pass/fail comparison.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub rule: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, rule: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), rule: rule.into(), passed, detail: detail.into() }
    }
}

fn build_problem(t: &Table, opts: &ReproOptions) -> Result<Box<dyn Problem>> {
    Ok(match t.problem {
        1 => Box::new(Rotation::default()),
        2 => Box::new(ForcedOscillator::default()),
        3 => Box::new(Convection1d::problem3(4.0)?),
        4 => Box::new(Convection1d::problem4()?),
        6 if t.number == 13 => Box::new(Convection2d::problem6(2, opts.plane_side)?),
        6 => Box::new(Convection2d::problem6(3, opts.plane_side)?),
        p => return Err(Error::Config(format!("no table runner for problem {p}"))),
    })
}

/// Runs every row of a table at the given columns (the table's own when `columns` is empty).
pub fn run_table(t: &Table, columns: &[f64], opts: &ReproOptions) -> Result<Vec<Cell>> {
    let problem = build_problem(t, opts)?;
    let cols: Vec<f64> = if columns.is_empty() { t.columns.to_vec() } else { columns.to_vec() };
    let jobs: Vec<(usize, f64)> = (0..t.rows.len()).flat_map(|r| cols.iter().map(move |&c| (r, c))).collect();
    let plane = if t.problem == 6 {
        Some(if t.number == 13 {
            Convection2d::problem6(2, opts.plane_side)?
        } else {
            Convection2d::problem6(3, opts.plane_side)?
        })
    } else {
        None
    };
    let cells = jobs
        .par_iter()
        .map(|&(r, column)| {
            let row = &t.rows[r];
            let dt = match t.axis {
                Axis::Dt => column,
                Axis::Cfl => problem.dt_from_cfl(column).expect("convection problem"),
            };
            let published = t.column_index(column).and_then(|i| row.errors[i]);
            let mut cell = Cell {
                table: t.number,
                label: row.label.into(),
                scheme: row.scheme.into(),
                column,
                dt,
                t_final: f64::NAN,
                measured: None,
                published,
                temporal: None,
                failure: None,
            };
            let outcome = builtin_scheme(row.scheme).and_then(|tab| run_problem(problem.as_ref(), &tab, dt, None));
            match outcome {
                Ok(out) => {
                    cell.t_final = out.t_final;
                    cell.measured = Some(out.error);
                    if let Some(p) = &plane {
                        cell.temporal =
                            p.semi_discrete(out.t_final).ok().map(|sd| ErrorMetric::Rms.eval(&out.state, &sd));
                    }
                }
                Err(e) => cell.failure = Some(e.to_string()),
            }
            cell
        })
        .collect();
    Ok(cells)
}

fn find<'a>(cells: &'a [Cell], scheme: &str, column: f64) -> Option<&'a Cell> {
    cells.iter().find(|c| c.scheme == scheme && (c.column - column).abs() < 1e-12)
}

fn within_factor(measured: f64, published: f64, factor: f64) -> bool {
    measured.is_finite() && measured > 0.0 && measured <= factor * published && published <= factor * measured
}

/// measured/published within [1/factor, factor] for each cell whose column and stage count
/// are selected. Cells without a published value are skipped.
pub fn factor_checks(t: &Table, cells: &[Cell], columns: &[f64], stages: Option<usize>, factor: f64) -> Vec<Check> {
    let mut out = Vec::new();
    for row in t.rows.iter().filter(|r| stages.is_none_or(|s| r.stages() == s)) {
        for &col in columns {
            let Some(cell) = find(cells, row.scheme, col) else {
                continue;
            };
            let Some(published) = cell.published else { continue };
            let (passed, detail) = match cell.measured {
                Some(m) => (within_factor(m, published, factor), format!("measured {m:.4e}, published {published:.4e}")),
                None => (false, format!("run failed: {}", cell.failure.as_deref().unwrap_or("?"))),
            };
            out.push(Check::new(
                format!("table {} {} @ {}", t.number, row.label, col),
                format!("within a factor of {factor}"),
                passed,
                detail,
            ));
        }
    }
    out
}

/// Family with the smallest error among rows with the given stage count.
fn winner<'a>(rows: impl Iterator<Item = (&'a str, Option<f64>)>) -> Option<(&'a str, f64)> {
    rows.filter_map(|(f, e)| e.map(|e| (f, e))).min_by(|a, b| a.1.total_cmp(&b.1))
}

/// The lowest-error family per column and stage count matches the published one.
pub fn winner_checks(t: &Table, cells: &[Cell], columns: &[f64]) -> Vec<Check> {
    let mut out = Vec::new();
    for stages in [2, 3] {
        let rows: Vec<_> = t.rows.iter().filter(|r| r.stages() == stages).collect();
        if rows.is_empty() {
            continue;
        }
        for &col in columns {
            let Some(ci) = t.column_index(col) else {
                continue;
            };
            let published = winner(rows.iter().map(|r| (r.family(), r.errors[ci])));
            let ours = winner(rows.iter().map(|r| (r.family(), find(cells, r.scheme, col).and_then(|c| c.measured))));
            let (Some(p), Some(o)) = (published, ours) else {
                continue;
            };
            out.push(Check::new(
                format!("table {} {stages}-stage winner @ {col}", t.number),
                "lowest-error family matches".to_string(),
                p.0 == o.0,
                format!("measured {} ({:.4e}), published {} ({:.4e})", o.0, o.1, p.0, p.1),
            ));
        }
    }
    out
}

/// Pairwise rates log2(e(2dt)/e(dt)) at the selected columns within ±tol of the printed rates.
pub fn rate_checks(t: &Table, cells: &[Cell], columns: &[f64], tol: f64) -> Vec<Check> {
    let mut out = Vec::new();
    for row in t.rows {
        for &col in columns {
            let Some(i) = t.column_index(col) else {
                continue;
            };
            let Some(Some(published)) = row.rates.get(i) else {
                continue;
            };
            let next = t.columns[i + 1];
            let (a, b) = match (
                find(cells, row.scheme, col).and_then(|c| c.measured),
                find(cells, row.scheme, next).and_then(|c| c.measured),
            ) {
                (Some(a), Some(b)) => (a, b),
                _ => continue,
            };
            let rate = (b / a).log2() / (next / col).log2();
            out.push(Check::new(
                format!("table {} {} rate @ {col}", t.number, row.label),
                format!("within ±{tol}"),
                (rate - published).abs() <= tol,
                format!("measured {rate:.2}, published {published:.2}"),
            ));
        }
    }
    out
}

/// `family` has the smallest measured error among rows with `stages` stages at `column`.
pub fn best_family_check(t: &Table, cells: &[Cell], column: f64, stages: usize, family: &str) -> Check {
    let rows = t.rows.iter().filter(|r| r.stages() == stages);
    let ours = winner(rows.map(|r| (r.family(), find(cells, r.scheme, column).and_then(|c| c.measured))));
    Check::new(
        format!("table {} {family} best among {stages}-stage @ {column}", t.number),
        "lowest measured error".to_string(),
        ours.is_some_and(|o| o.0 == family),
        format!("lowest: {:?}", ours),
    )
}

/// Tolerance profile for the table comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Multiplies every "within a factor of" bound.
    pub factor_scale: f64,
    /// Allowed deviation of a convergence rate from the printed one.
    pub rate: f64,
}

impl Tolerances {
    /// The bounds stated with each table.
    pub const PAPER: Tolerances = Tolerances { factor_scale: 1.0, rate: 0.15 };
    /// Half the factor bounds and a ±0.05 rate window.
    pub const STRICT: Tolerances = Tolerances { factor_scale: 0.5, rate: 0.05 };

    fn factor(&self, f: f64) -> f64 {
        (f * self.factor_scale).max(1.0)
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::PAPER
    }
}

/// The comparison rules applied by `verify` for one table.
pub fn table_checks(number: u32, cells: &[Cell], tol: &Tolerances) -> Result<Vec<Check>> {
    let t = table(number).ok_or_else(|| Error::Config(format!("no table {number}")))?;
    let mut out = Vec::new();
    match number {
        9 => {
            out.extend(rate_checks(t, cells, &[0.008, 0.016], tol.rate));
            out.extend(factor_checks(t, cells, t.columns, None, tol.factor(3.0)));
            out.extend(winner_checks(t, cells, t.columns));
        }
        10 => {
            out.extend(factor_checks(t, cells, t.columns, None, tol.factor(3.0)));
            out.extend(winner_checks(t, cells, t.columns));
        }
        11 => {
            out.extend(factor_checks(t, cells, &[4.0, 7.5], None, tol.factor(3.0)));
            out.extend(factor_checks(t, cells, &[15.0, 20.0], None, tol.factor(5.0)));
            out.push(best_family_check(t, cells, 7.5, 2, "S2C"));
            out.push(best_family_check(t, cells, 15.0, 2, "S2B"));
        }
        12 => {
            out.extend(factor_checks(t, cells, &[1.0, 2.0, 3.0], Some(2), tol.factor(3.0)));
            out.extend(factor_checks(t, cells, &[2.0, 3.0], Some(3), tol.factor(3.0)));
            for col in [2.0, 2.5, 3.0] {
                out.push(best_family_check(t, cells, col, 2, "S2B"));
            }
        }
        13 | 14 => out.extend(plane_checks(t, cells)),
        _ => return Err(Error::Config(format!("no checks for table {number}"))),
    }
    Ok(out)
}

/// Column halved for the temporal-order check of the 2D problem.
pub const PLANE_HALVING: (f64, f64) = (0.6, 0.3);

/// Columns run for a table by `verify`: the published ones plus any needed by the checks.
pub fn verify_columns(t: &Table) -> Vec<f64> {
    let mut cols = t.columns.to_vec();
    if t.problem == 6 && t.column_index(PLANE_HALVING.1).is_none() {
        cols.push(PLANE_HALVING.1);
    }
    cols
}

/// Property checks for the reduced 2D runs: temporal order over N_c halving, error
/// decreasing with N_c, and the S3B ≤ S3C ≤ S3D ordering at N_c = 0.6.
pub fn plane_checks(t: &Table, cells: &[Cell]) -> Vec<Check> {
    let mut out = Vec::new();
    let stages = if t.number == 13 { 2 } else { 3 };
    let min_order = if stages == 2 { 2.0 } else { 4.0 };
    let (big, small) = PLANE_HALVING;
    for row in t.rows {
        let a = find(cells, row.scheme, big).and_then(|c| c.temporal);
        let b = find(cells, row.scheme, small).and_then(|c| c.temporal);
        if let (Some(a), Some(b)) = (a, b) {
            let order = (a / b).log2();
            out.push(Check::new(
                format!("table {} {} temporal order {big}→{small}", t.number, row.label),
                format!("≥ {min_order}"),
                order >= min_order,
                format!("measured {order:.2} ({a:.3e} → {b:.3e})"),
            ));
        }
        let errs: Vec<(f64, f64)> = t
            .columns
            .iter()
            .filter_map(|&c| find(cells, row.scheme, c).and_then(|x| x.measured).map(|e| (c, e)))
            .collect();
        if errs.len() == t.columns.len() {
            let mono = errs.windows(2).all(|w| w[0].1 < w[1].1);
            out.push(Check::new(
                format!("table {} {} error decreases with N_c", t.number, row.label),
                "strictly monotone over the published columns".to_string(),
                mono,
                errs.iter().map(|(c, e)| format!("{c}: {e:.3e}")).collect::<Vec<_>>().join(", "),
            ));
        }
    }
    if stages == 3 {
        let e = |s: &str| find(cells, s, 0.6).and_then(|c| c.measured);
        if let (Some(b), Some(c), Some(d)) = (e("S3B1"), e("S3C1"), e("S3D1")) {
            out.push(Check::new(
                format!("table {} S3B ≤ S3C ≤ S3D @ 0.6", t.number),
                "ordering".to_string(),
                b <= c && c <= d,
                format!("{b:.3e}, {c:.3e}, {d:.3e}"),
            ));
        }
    }
    out
}

/// Shock diagnostics for one scheme on the Burgers problem.
pub fn burgers_run(scheme: &str) -> Result<ShockReport> {
    let p = Burgers::problem5()?;
    let tab = builtin_scheme(scheme)?;
    let dt = p.dt_from_cfl(1.0).expect("cfl");
    let out = run_problem(&p, &tab, dt, None)?;
    Ok(p.shock_report(&out.state, out.t_final))
}

/// Midpoint within 2Δx of the characteristics solution and the largest overshoot within
/// 0.1 of the shock.
pub fn burgers_checks(scheme: &str, r: &ShockReport) -> Vec<Check> {
    let dx = 0.005;
    vec![
        Check::new(
            format!("problem 5 {scheme} midpoint"),
            "within 2Δx".to_string(),
            r.midpoint_error() <= 2.0 * dx,
            format!("{:.5} vs {:.5}", r.midpoint, r.exact_midpoint),
        ),
        Check::new(
            format!("problem 5 {scheme} overshoot location"),
            "within ±0.1 of the shock".to_string(),
            r.overshoot_offset() <= 0.1,
            format!(
                "overshoot {:.3e} at x = {:.4}, L1 outside window {:.3e}",
                r.overshoot, r.overshoot_x, r.l1_outside
            ),
        ),
    ]
}

/// Schemes the Burgers checks run with: the first of each two-stage family and IRK24,
/// the first of each three-stage family and IRK36.
pub const BURGERS_SCHEMES: [&str; 8] = ["S2A1", "S2B1", "S2C1", "IRK24", "S3A1", "S3B1", "S3C1", "IRK36"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::reference::TABLE10;

    #[test]
    fn problem2_table_reproduces_published_cells() {
        let cells = run_table(&TABLE10, &[0.016], &ReproOptions::default()).unwrap();
        let irk36 = cells.iter().find(|c| c.scheme == "IRK36").unwrap();
        assert!((irk36.measured.unwrap() / 2.0722e-9 - 1.0).abs() < 0.01);
        let checks = factor_checks(&TABLE10, &cells, &[0.016], None, 3.0);
        assert_eq!(checks.len(), 8);
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
    }

    #[test]
    fn winner_check_uses_families() {
        let cells = run_table(&TABLE10, &[0.032], &ReproOptions::default()).unwrap();
        let w = winner_checks(&TABLE10, &cells, &[0.032]);
        assert_eq!(w.len(), 2);
        assert!(w.iter().all(|c| c.passed), "{w:?}");
    }

    #[test]
    fn factor_rule() {
        assert!(within_factor(2.9, 1.0, 3.0));
        assert!(!within_factor(0.3, 1.0, 3.0));
        assert!(!within_factor(f64::NAN, 1.0, 3.0));
    }
}
