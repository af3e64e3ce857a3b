use std::fmt::Write as _;

use irkwave::problems::reference::table;
use irkwave::problems::reproduce::{
    burgers_checks, burgers_run, run_table, table_checks, verify_columns, Cell, Check, ReproOptions, Tolerances,
    BURGERS_SCHEMES,
};
use rayon::prelude::*;
use serde_json::json;

use crate::output::Output;
use crate::{CmdResult, Failure};

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:e}"))
}

/// One row per (scheme, column) run, mirroring the published table layout.
pub fn cells_csv(cells: &[Cell]) -> String {
    let mut s = String::from("label,scheme,column,dt,t_final,measured,published,ratio,temporal,failure\n");
    for c in cells {
        let ratio = match (c.measured, c.published) {
            (Some(m), Some(p)) => Some(m / p),
            _ => None,
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            c.label,
            c.scheme,
            c.column,
            c.dt,
            c.t_final,
            opt(c.measured),
            opt(c.published),
            ratio.map_or_else(String::new, |r| format!("{r:.4}")),
            opt(c.temporal),
            c.failure.as_deref().unwrap_or("").replace(',', ";"),
        );
    }
    s
}

pub fn checks_csv(checks: &[Check]) -> String {
    let mut s = String::from("name,rule,passed,detail\n");
    for c in checks {
        let _ = writeln!(s, "{},{},{},{}", c.name, c.rule, c.passed, c.detail.replace(',', ";"));
    }
    s
}

fn report(checks: &[Check]) {
    for c in checks {
        eprintln!("{} {}: {} [{}]", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail, c.rule);
    }
}

pub fn verify(out: &mut Output, tables: &[u32], burgers: bool, plane_side: f64, tol: &Tolerances) -> CmdResult {
    if !(plane_side > 0.0) {
        return Err(Failure::usage("--plane-side must be positive"));
    }
    let opts = ReproOptions { plane_side };
    out.set_config(json!({ "tables": tables, "burgers": burgers, "plane_side": plane_side, "tolerances": tol }));
    for &n in tables {
        let t = table(n).ok_or_else(|| Failure::usage(format!("--table must be 9 to 14, got {n}")))?;
        let cells = run_table(t, &verify_columns(t), &opts)?;
        let checks = table_checks(n, &cells, tol)?;
        report(&checks);
        out.emit(&format!("table{n}.csv"), &cells_csv(&cells))?;
        out.emit(&format!("table{n}_checks.csv"), &checks_csv(&checks))?;
        out.add_checks(checks);
    }
    if burgers {
        let runs: Vec<_> = BURGERS_SCHEMES.par_iter().map(|s| (*s, burgers_run(s))).collect();
        let mut checks = Vec::new();
        let mut csv = String::from("scheme,t,midpoint,exact_midpoint,overshoot,overshoot_x,l1_outside\n");
        for (s, r) in runs {
            let r = r?;
            let _ = writeln!(
                csv,
                "{s},{},{},{},{:e},{},{:e}",
                r.t, r.midpoint, r.exact_midpoint, r.overshoot, r.overshoot_x, r.l1_outside
            );
            checks.extend(burgers_checks(s, &r));
        }
        report(&checks);
        out.emit("problem5.csv", &csv)?;
        out.emit("problem5_checks.csv", &checks_csv(&checks))?;
        out.add_checks(checks);
    }
    Ok(())
}
