use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spatial::{Boundary, ReducedOperator, SpatialOperator, StencilKind};
use crate::timeloop::{LinearOde, System};

use super::{ErrorMetric, Problem};

/// Gaussian-modulated carrier centred at `xm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum WavePacket {
    /// e^{−ξ²/b} cos(kξ), ξ = x − x_m.
    Single { xm: f64, b: f64, k: f64 },
    /// e^{−ξ²/b} [cos(2πk1 ξ) + cos(2πk2 ξ)].
    Double { xm: f64, b: f64, k1: f64, k2: f64 },
}

impl WavePacket {
    pub fn center(&self) -> f64 {
        match *self {
            WavePacket::Single { xm, .. } | WavePacket::Double { xm, .. } => xm,
        }
    }

    /// Profile as a function of the offset from the centre.
    pub fn shape(&self, xi: f64) -> f64 {
        use std::f64::consts::TAU;
        match *self {
            WavePacket::Single { b, k, .. } => (-xi * xi / b).exp() * (k * xi).cos(),
            WavePacket::Double { b, k1, k2, .. } => {
                (-xi * xi / b).exp() * ((TAU * k1 * xi).cos() + (TAU * k2 * xi).cos())
            }
        }
    }
}

/// u_t + c u_x = 0 with a compact or explicit first-derivative operator, in mass form
/// M1 u' = −c M2 u. Closed grids hold u = 0 at both ends and integrate interior nodes only.
pub struct Convection1d {
    pub name: String,
    pub op: SpatialOperator,
    pub c: f64,
    pub packet: WavePacket,
    pub t_end: f64,
    reduced: Option<ReducedOperator>,
    sys: LinearOde,
}

impl Convection1d {
    pub fn new(name: &str, op: SpatialOperator, c: f64, packet: WavePacket, t_end: f64) -> Result<Self> {
        let (reduced, sys) = match op.boundary {
            Boundary::Periodic => (None, LinearOde::new(op.m2.scaled(-c)).with_mass(op.m1.clone())),
            Boundary::Closed => {
                let r = op.reduce(&[0, op.n - 1])?;
                // pinned values are zero, so B drops out
                let sys = LinearOde::new(r.m2.scaled(-c)).with_mass(r.m1.clone());
                (Some(r), sys)
            }
        };
        Ok(Self { name: name.into(), op, c, packet, t_end, reduced, sys })
    }

    /// Periodic [0, 30) with h = 0.01, Lele6, b = 2, x_m = 5, run to t = 20.
    pub fn problem3(k: f64) -> Result<Self> {
        let op = SpatialOperator::build(StencilKind::Lele6, 3000, 0.01, Boundary::Periodic)?;
        Self::new("problem3", op, 1.0, WavePacket::Single { xm: 5.0, b: 2.0, k }, 20.0)
    }

    /// [0, 600] with Δx = 0.5, zero Dirichlet ends, two-wave packet at x_m = 90, run to t = 300.
    pub fn problem4() -> Result<Self> {
        let op = SpatialOperator::build(StencilKind::Lele6, 1201, 0.5, Boundary::Closed)?;
        let packet = WavePacket::Double { xm: 90.0, b: 400.0, k1: 0.125, k2: 0.0625 };
        Self::new("problem4", op, 1.0, packet, 300.0)
    }

    fn period(&self) -> f64 {
        self.op.n as f64 * self.op.h
    }

    /// Exact solution at every grid node.
    pub fn exact_full(&self, t: f64) -> Vec<f64> {
        let xm = self.packet.center();
        match self.op.boundary {
            Boundary::Periodic => {
                let l = self.period();
                (0..self.op.n)
                    .map(|i| {
                        let xi = (self.op.x(i) - self.c * t - xm).rem_euclid(l);
                        let xi = if xi >= 0.5 * l { xi - l } else { xi };
                        self.packet.shape(xi) + self.packet.shape(xi - l) + self.packet.shape(xi + l)
                    })
                    .collect()
            }
            Boundary::Closed => (0..self.op.n).map(|i| self.packet.shape(self.op.x(i) - self.c * t - xm)).collect(),
        }
    }

    /// Nodal values of a state, pinned nodes included.
    pub fn full_state(&self, u: &[f64]) -> Vec<f64> {
        match &self.reduced {
            Some(r) => r.scatter(u, &vec![0.0; r.pinned.len()], self.op.n),
            None => u.to_vec(),
        }
    }

    fn restrict(&self, full: Vec<f64>) -> Vec<f64> {
        match &self.reduced {
            Some(r) => r.free.iter().map(|&i| full[i]).collect(),
            None => full,
        }
    }
}

impl Problem for Convection1d {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn system(&self) -> &dyn System {
        &self.sys
    }

    fn initial(&self) -> Vec<f64> {
        self.exact(0.0)
    }

    fn exact(&self, t: f64) -> Vec<f64> {
        self.restrict(self.exact_full(t))
    }

    fn metric(&self) -> ErrorMetric {
        ErrorMetric::Rms
    }

    fn t_end(&self) -> f64 {
        self.t_end
    }

    fn dt_from_cfl(&self, nc: f64) -> Option<f64> {
        Some(nc * self.op.h / self.c)
    }

    /// RMS over all grid nodes.
    fn error(&self, u: &[f64], t: f64) -> f64 {
        ErrorMetric::Rms.eval(&self.full_state(u), &self.exact_full(t))
    }
}
