//! Benchmark problems: ODE test cases, linear convection in one and two dimensions and
//! inviscid Burgers, each with its exact solution and error metric.

mod burgers;
mod convection;
mod ode;
mod plane;
pub mod reference;
pub mod reproduce;

pub use burgers::{Burgers, BurgersSystem, ShockReport};
pub use convection::{Convection1d, WavePacket};
pub use ode::{ForcedOscillator, Rotation};
pub use plane::{Convection2d, PlaneOperator};

use serde::{Deserialize, Serialize};

use crate::butcher::ButcherTableau;
use crate::error::Result;
use crate::timeloop::{integrate, StepOptions, StepPolicy, StepReport, System};

/// How the numerical and exact states are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMetric {
    /// |u_0 − u_0,exact| for the first state component.
    AbsFirst,
    /// Euclidean norm of the error vector.
    Euclidean,
    /// Root-mean-square grid norm √(Σ e_i² / N).
    Rms,
    /// Mean absolute error Σ |e_i| / N.
    L1,
}

impl ErrorMetric {
    pub fn eval(self, u: &[f64], exact: &[f64]) -> f64 {
        match self {
            ErrorMetric::AbsFirst => (u[0] - exact[0]).abs(),
            ErrorMetric::Euclidean => u.iter().zip(exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(),
            ErrorMetric::Rms => {
                (u.iter().zip(exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / u.len().max(1) as f64).sqrt()
            }
            ErrorMetric::L1 => u.iter().zip(exact).map(|(a, b)| (a - b).abs()).sum::<f64>() / u.len().max(1) as f64,
        }
    }
}

/// A benchmark: semi-discrete system, initial data, exact solution and metric.
pub trait Problem: Sync {
    fn name(&self) -> String;
    fn system(&self) -> &dyn System;
    /// State at t = 0 in the system's variables.
    fn initial(&self) -> Vec<f64>;
    /// Exact state at time t in the system's variables.
    fn exact(&self, t: f64) -> Vec<f64>;
    fn metric(&self) -> ErrorMetric;
    fn t_end(&self) -> f64;
    /// Time step for a CFL number, for problems with a convection speed.
    fn dt_from_cfl(&self, nc: f64) -> Option<f64> {
        let _ = nc;
        None
    }
    /// Solver options the problem is meant to be run with.
    fn step_options(&self) -> StepOptions {
        StepOptions::default()
    }
    /// Error of a state at time t; problems with non-node metrics override this.
    fn error(&self, u: &[f64], t: f64) -> f64 {
        self.metric().eval(u, &self.exact(t))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOutcome {
    pub error: f64,
    pub t_final: f64,
    pub report: StepReport,
    #[serde(skip)]
    pub state: Vec<f64>,
}

/// Integrates a problem to `t_end` with step `dt`. Spans that are not a whole number of
/// steps end at the first step time past `t_end`, and the error is taken there.
pub fn run_problem(p: &dyn Problem, tab: &ButcherTableau, dt: f64, t_end: Option<f64>) -> Result<RunOutcome> {
    let t_end = t_end.unwrap_or_else(|| p.t_end());
    let opts = StepOptions { policy: StepPolicy::Cover, ..p.step_options() };
    let (u, report) = integrate(p.system(), tab, &p.initial(), 0.0, t_end, dt, opts, None)?;
    let t_final = report.t_final;
    Ok(RunOutcome { error: p.error(&u, t_final), t_final, report, state: u })
}
