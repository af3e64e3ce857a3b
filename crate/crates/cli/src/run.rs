use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use irkwave::problems::{Burgers, Convection1d, Convection2d, ForcedOscillator, Problem, Rotation};
use irkwave::spatial::{Boundary, SpatialOperator, StencilKind};
use irkwave::timeloop::{integrate, StepOptions, StepPolicy};
use serde::{Deserialize, Serialize};

use crate::analysis::load_scheme;
use crate::output::Output;
use crate::{CmdResult, Failure};

/// How the 2D carrier wavenumber is read: kx = ky = 2π, or kx + ky = 2π.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneWavenumber {
    #[default]
    Each,
    Sum,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: u32,
    pub scheme: String,
    #[serde(default)]
    pub operator: Option<StencilKind>,
    #[serde(default)]
    pub nc: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Carrier wavenumber of the 1D packet.
    #[serde(default)]
    pub k: Option<f64>,
    /// Side of the 2D domain.
    #[serde(default)]
    pub side: Option<f64>,
    /// 2D configuration (two- or three-stage); defaults to the scheme's stage count.
    #[serde(default)]
    pub stages: Option<usize>,
    #[serde(default)]
    pub wavenumber: PlaneWavenumber,
}

fn bad(msg: impl Into<String>) -> Failure {
    Failure::usage(msg)
}

fn build(cfg: &RunConfig, stages: usize) -> Result<Box<dyn Problem>, Failure> {
    let no_op = |p: u32| match cfg.operator {
        Some(_) => Err(bad(format!("problem {p} has no spatial operator"))),
        None => Ok(()),
    };
    Ok(match cfg.problem {
        1 => {
            no_op(1)?;
            Box::new(Rotation::default())
        }
        2 => {
            no_op(2)?;
            Box::new(ForcedOscillator::default())
        }
        3 => {
            let base = Convection1d::problem3(cfg.k.unwrap_or(4.0))?;
            match cfg.operator {
                None => Box::new(base),
                Some(kind) => {
                    let op = SpatialOperator::build(kind, base.op.n, base.op.h, Boundary::Periodic)?;
                    Box::new(Convection1d::new("problem3", op, base.c, base.packet, base.t_end)?)
                }
            }
        }
        4 => {
            let base = Convection1d::problem4()?;
            match cfg.operator {
                None => Box::new(base),
                Some(kind) => {
                    let op = SpatialOperator::build(kind, base.op.n, base.op.h, Boundary::Closed)?;
                    Box::new(Convection1d::new("problem4", op, base.c, base.packet, base.t_end)?)
                }
            }
        }
        5 => Box::new(Burgers::new(cfg.operator.unwrap_or(StencilKind::Lele6), 1001)?),
        6 => {
            let base = Convection2d::problem6(cfg.stages.unwrap_or(stages), cfg.side.unwrap_or(60.0))?;
            let k = match cfg.wavenumber {
                PlaneWavenumber::Each => (base.kx, base.ky),
                PlaneWavenumber::Sum => (0.5 * base.kx, 0.5 * base.ky),
            };
            let kind = cfg.operator.unwrap_or(base.kind);
            Box::new(Convection2d::new("problem6", kind, base.n, base.h, base.b, k, base.t_end)?)
        }
        p => return Err(bad(format!("problem must be 1 to 6, got {p}"))),
    })
}

fn time_step(cfg: &RunConfig, p: &dyn Problem) -> Result<f64, Failure> {
    let dt = match (cfg.dt, cfg.nc) {
        (Some(dt), None) => dt,
        (None, Some(nc)) => {
            p.dt_from_cfl(nc).ok_or_else(|| bad(format!("problem {} takes dt, not nc", cfg.problem)))?
        }
        (Some(_), Some(_)) => return Err(bad("give either dt or nc, not both")),
        (None, None) => return Err(bad("the configuration needs dt or nc")),
    };
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(bad(format!("time step must be positive, got {dt}")));
    }
    Ok(dt)
}

pub fn run(out: &mut Output, path: &Path) -> CmdResult {
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    out.set_config(serde_json::to_value(&cfg).expect("config serializes"));
    let tab = load_scheme(&cfg.scheme)?;
    let p = build(&cfg, tab.stages())?;
    let dt = time_step(&cfg, p.as_ref())?;
    let t_end = cfg.t_end.unwrap_or_else(|| p.t_end());
    if !(t_end >= 0.0) {
        return Err(bad(format!("t_end must be non-negative, got {t_end}")));
    }
    let mut csv = String::from("t,error\n");
    let mut rec = |t: f64, u: &[f64]| {
        let _ = writeln!(csv, "{t},{:e}", p.error(u, t));
    };
    let opts = StepOptions { policy: StepPolicy::Cover, ..p.step_options() };
    let (_, report) = integrate(p.system(), &tab, &p.initial(), 0.0, t_end, dt, opts, Some(&mut rec))?;
    match &cfg.output {
        Some(target) => out.emit_path(target, &csv)?,
        None => out.emit("results.csv", &csv)?,
    }
    eprintln!(
        "{} with {}: {} steps of dt = {dt}, t = {}, {:.2} s",
        p.name(),
        tab.name(),
        report.steps,
        report.t_final,
        report.wall_time_s
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_defaults() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"problem": 6, "scheme": "S2B1", "nc": 0.5, "wavenumber": "sum"}"#).unwrap();
        assert_eq!(cfg.wavenumber, PlaneWavenumber::Sum);
        assert!(cfg.dt.is_none());
        assert!(serde_json::from_str::<RunConfig>(r#"{"problem": 1, "scheme": "IRK24", "bogus": 1}"#).is_err());
    }

    #[test]
    fn time_step_rules() {
        let p = Rotation::default();
        let mut cfg: RunConfig = serde_json::from_str(r#"{"problem": 1, "scheme": "IRK24", "dt": 0.01}"#).unwrap();
        assert_eq!(time_step(&cfg, &p).unwrap(), 0.01);
        cfg.dt = None;
        cfg.nc = Some(1.0);
        assert_eq!(time_step(&cfg, &p).unwrap_err().code, 2);
    }
}
