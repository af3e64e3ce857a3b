use std::path::Path;

use irkwave::butcher::{builtin_scheme, order_of_accuracy, registry, ButcherTableau};
use irkwave::optimizer::{derive, verify_scheme, Alpha, ConstraintSet, Family};
use irkwave::spatial::{group_velocity_reversal, velocity_map, Boundary, SpatialOperator, StencilKind};
use irkwave::spectral::{dispersion_norm, dispersive_order, sample_curve};
use rayon::prelude::*;
use serde_json::json;

use crate::output::Output;
use crate::range::parse_range;
use crate::{CmdResult, Failure};

const MIN_SAMPLES: usize = 16;
const THRESHOLD_SCAN: usize = 400;

/// A registry name, or a path to a tableau JSON file when one exists.
pub fn load_scheme(arg: &str) -> Result<ButcherTableau, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        return ButcherTableau::read(path).map_err(|e| Failure::usage(format!("{arg}: {e}")));
    }
    Ok(builtin_scheme(arg)?)
}

pub fn schemes_list(out: &mut Output) -> CmdResult {
    let rows: Vec<String> = registry()
        .par_iter()
        .map(|info| {
            let t = &info.tableau;
            let phi = dispersion_norm(t).map_or_else(|_| "nan".to_string(), |v| format!("{v:.6e}"));
            format!("{},{},{},{},{}\n", t.name(), t.stages(), order_of_accuracy(t, 1e-9), dispersive_order(t), phi)
        })
        .collect();
    let mut text = String::from("name,stages,order,dispersive_order,phi_norm\n");
    rows.iter().for_each(|r| text.push_str(r));
    out.emit("schemes.csv", &text)?;
    Ok(())
}

pub fn schemes_show(out: &mut Output, name: &str) -> CmdResult {
    let tab = builtin_scheme(name)?;
    out.emit(&format!("{name}.json"), &(tab.to_json() + "\n"))?;
    Ok(())
}

pub fn analyze(out: &mut Output, scheme: &str, samples: usize) -> CmdResult {
    if samples < MIN_SAMPLES {
        return Err(Failure::usage(format!("--samples must be at least {MIN_SAMPLES}, got {samples}")));
    }
    let tab = load_scheme(scheme)?;
    let curve = sample_curve(&tab, samples)?;
    let report = verify_scheme(&tab)?;
    out.emit("spectral.csv", &curve.to_csv())?;
    out.emit("report.json", &(serde_json::to_string_pretty(&report).map_err(io)? + "\n"))?;
    Ok(())
}

pub fn optimize(
    out: &mut Output,
    family: usize,
    alpha: &str,
    closures: &Path,
    reference: Option<&str>,
    name: &str,
) -> CmdResult {
    let fam =
        Family::from_stages(family).ok_or_else(|| Failure::usage(format!("--family must be 2 or 3, got {family}")))?;
    let alpha: Alpha = alpha.parse().map_err(|e: irkwave::Error| Failure::usage(e.to_string()))?;
    let text = std::fs::read_to_string(closures).map_err(|e| Failure::usage(format!("{}: {e}", closures.display())))?;
    let set = ConstraintSet::parse(fam.stages(), &text)
        .map_err(|e| Failure::usage(format!("{}: {e}", closures.display())))?;
    let reference = reference.map(builtin_scheme).transpose()?;
    out.set_config(json!({
        "family": family,
        "alpha": alpha.to_string(),
        "closures": text,
        "reference": reference.as_ref().map(|r| r.name().to_string()),
    }));
    let d = derive(fam, alpha, &set, reference.as_ref())?;
    let tab = d.solution.tableau.clone().renamed(name);
    let log = json!({
        "family": family,
        "alpha": d.alpha.to_string(),
        "param": d.param,
        "residual": d.solution.residual,
        "distinct_roots": d.solution.distinct_roots,
        "tie_break": d.solution.tie_break,
    });
    out.emit("tableau.json", &(tab.to_json() + "\n"))?;
    out.emit("derivation.json", &(serde_json::to_string_pretty(&log).map_err(io)? + "\n"))?;
    Ok(())
}

pub struct MapArgs {
    pub scheme: String,
    pub operator: String,
    pub nodes: usize,
    pub h: f64,
    pub boundary: String,
    pub probe: String,
    pub nc: String,
    pub kh: String,
}

pub fn map(out: &mut Output, a: &MapArgs) -> CmdResult {
    let tab = load_scheme(&a.scheme)?;
    let kind: StencilKind = a.operator.parse().map_err(|e: irkwave::Error| Failure::usage(e.to_string()))?;
    let boundary: Boundary = a.boundary.parse().map_err(|e: irkwave::Error| Failure::usage(e.to_string()))?;
    let nc = parse_range(&a.nc).map_err(Failure::usage)?;
    let kh = parse_range(&a.kh).map_err(Failure::usage)?;
    if !(a.h > 0.0) {
        return Err(Failure::usage("--h must be positive"));
    }
    let probe = match a.probe.as_str() {
        "mid" => a.nodes / 2,
        s => s.parse().map_err(|_| Failure::usage(format!("--probe must be `mid` or a node index, got `{s}`")))?,
    };
    if probe >= a.nodes {
        return Err(Failure::usage(format!("probe {probe} outside a grid of {} nodes", a.nodes)));
    }
    let op = SpatialOperator::build(kind, a.nodes, a.h, boundary)?;
    let vm = velocity_map(&op, &tab, &nc, &kh, probe)?;
    out.emit("velocity_map.csv", &vm.to_csv())?;
    let threshold = group_velocity_reversal(&op, &tab, nc[0], probe, THRESHOLD_SCAN).ok().flatten();
    match threshold {
        Some(k) => eprintln!("q-wave threshold at N_c = {}: kh = {k:.6}", nc[0]),
        None => eprintln!("q-wave threshold at N_c = {}: none in (0, π]", nc[0]),
    }
    if out.has_dir() {
        let summary = json!({ "nc": nc[0], "probe": probe, "qwave_threshold_kh": threshold });
        out.emit("threshold.json", &(serde_json::to_string_pretty(&summary).map_err(io)? + "\n"))?;
    }
    Ok(())
}

fn io(e: serde_json::Error) -> Failure {
    Failure { code: 1, msg: e.to_string() }
}
