use crate::linalg::Csr;
use crate::timeloop::{LinearOde, System};

use super::{ErrorMetric, Problem};

/// u' = Λu with Λ = [[0, −λ], [λ, 0]], u(0) = (1, 0); exact (cos λt, sin λt).
pub struct Rotation {
    pub lambda: f64,
    pub t_end: f64,
    pub metric: ErrorMetric,
    sys: LinearOde,
}

impl Rotation {
    pub fn new(lambda: f64) -> Self {
        let sys = LinearOde::new(Csr::from_rows(2, vec![vec![(1, -lambda)], vec![(0, lambda)]]));
        Self { lambda, t_end: 0.768, metric: ErrorMetric::Euclidean, sys }
    }
}

impl Default for Rotation {
    fn default() -> Self {
        Self::new(10.0)
    }
}

impl Problem for Rotation {
    fn name(&self) -> String {
        "problem1".into()
    }

    fn system(&self) -> &dyn System {
        &self.sys
    }

    fn initial(&self) -> Vec<f64> {
        vec![1.0, 0.0]
    }

    fn exact(&self, t: f64) -> Vec<f64> {
        vec![(self.lambda * t).cos(), (self.lambda * t).sin()]
    }

    fn metric(&self) -> ErrorMetric {
        self.metric
    }

    fn t_end(&self) -> f64 {
        self.t_end
    }
}

/// ü = −k²u + (k² − ω²) sin ωt as the system (u, u̇); with u(0) = 0, u̇(0) = ω the
/// solution is sin ωt.
pub struct ForcedOscillator {
    pub omega: f64,
    pub k: f64,
    pub u0: f64,
    pub v0: f64,
    pub t_end: f64,
    sys: LinearOde,
}

impl ForcedOscillator {
    pub fn new(omega: f64, k: f64) -> Self {
        let amp = k * k - omega * omega;
        let sys =
            LinearOde::new(Csr::from_rows(2, vec![vec![(1, 1.0)], vec![(0, -k * k)]])).with_forcing(move |t, f| {
                f[0] = 0.0;
                f[1] = amp * (omega * t).sin();
            });
        Self { omega, k, u0: 0.0, v0: omega, t_end: 0.768, sys }
    }
}

impl Default for ForcedOscillator {
    fn default() -> Self {
        Self::new(10.0, 15.0)
    }
}

impl Problem for ForcedOscillator {
    fn name(&self) -> String {
        "problem2".into()
    }

    fn system(&self) -> &dyn System {
        &self.sys
    }

    fn initial(&self) -> Vec<f64> {
        vec![self.u0, self.v0]
    }

    fn exact(&self, t: f64) -> Vec<f64> {
        let (w, k) = (self.omega, self.k);
        let u = self.u0 * (k * t).cos() + (self.v0 - w) * (k * t).sin() / k + (w * t).sin();
        let v = -self.u0 * k * (k * t).sin() + (self.v0 - w) * (k * t).cos() + w * (w * t).cos();
        vec![u, v]
    }

    fn metric(&self) -> ErrorMetric {
        ErrorMetric::AbsFirst
    }

    fn t_end(&self) -> f64 {
        self.t_end
    }
}
