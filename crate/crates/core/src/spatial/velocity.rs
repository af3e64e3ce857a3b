//! Scaled numerical phase and group velocity of the fully discrete scheme at one node.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::butcher::ButcherTableau;
use crate::error::{Error, Result};
use crate::spectral::unwrapped_phase;

use super::{keq_from_row, SpatialOperator};

/// Grid of (N_c, kh) cells; `vp[i][j]`, `vg[i][j]` belong to `nc_grid[i]`, `kh_grid[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityMap {
    pub nc_grid: Vec<f64>,
    pub kh_grid: Vec<f64>,
    pub vp: Vec<Vec<f64>>,
    pub vg: Vec<Vec<f64>>,
    pub valid: Vec<Vec<bool>>,
}

impl VelocityMap {
    /// CSV with header `nc,kh,vp,vg,valid`; invalid cells carry NaN.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("nc,kh,vp,vg,valid\n");
        for (i, nc) in self.nc_grid.iter().enumerate() {
            for (j, kh) in self.kh_grid.iter().enumerate() {
                out.push_str(&format!(
                    "{nc},{kh},{:e},{:e},{}\n",
                    self.vp[i][j],
                    self.vg[i][j],
                    u8::from(self.valid[i][j])
                ));
            }
        }
        out
    }

    /// Smallest kh on the grid where the group velocity is negative, per N_c row.
    pub fn first_negative_vg(&self) -> Vec<Option<f64>> {
        self.vg
            .iter()
            .zip(&self.valid)
            .map(|(row, ok)| {
                row.iter().zip(ok).zip(&self.kh_grid).find(|((v, ok), _)| **ok && **v < 0.0).map(|(_, kh)| *kh)
            })
            .collect()
    }
}

/// Per-step phase β = arg G_N(N_c·h·k_eq) of the mode with wavenumber kh/h at the probe.
struct Probe<'a> {
    op: &'a SpatialOperator,
    tab: &'a ButcherTableau,
    row: Vec<(usize, f64)>,
    j: usize,
}

impl Probe<'_> {
    fn sigma(&self, nc: f64, kh: f64) -> Complex64 {
        nc * self.op.h * keq_from_row(&self.row, self.op, kh / self.op.h, self.j)
    }

    fn beta(&self, nc: f64, kh: f64) -> Result<f64> {
        unwrapped_phase(self.tab, self.sigma(nc, kh))
    }

    fn cell(&self, nc: f64, kh: f64, step: f64) -> Result<(f64, f64)> {
        let b = self.beta(nc, kh)?;
        let db = (self.beta(nc, kh + step)? - self.beta(nc, kh - step)?) / (2.0 * step);
        Ok((b / (nc * kh), db / nc))
    }
}

fn fd_step(kh_grid: &[f64]) -> f64 {
    let min_gap = kh_grid.windows(2).map(|w| (w[1] - w[0]).abs()).filter(|g| *g > 0.0).fold(f64::INFINITY, f64::min);
    1e-4f64.min(0.5 * min_gap)
}

/// Scaled phase velocity β/(N_c kh) and group velocity (1/N_c) dβ/d(kh) at node `probe`.
pub fn velocity_map(
    op: &SpatialOperator,
    tab: &ButcherTableau,
    nc_grid: &[f64],
    kh_grid: &[f64],
    probe: usize,
) -> Result<VelocityMap> {
    if nc_grid.iter().any(|v| !(*v > 0.0)) || kh_grid.iter().any(|v| !(*v > 0.0 && *v <= std::f64::consts::PI + 1e-12))
    {
        return Err(Error::Dimension("velocity map needs N_c > 0 and kh in (0, π]".into()));
    }
    let p = Probe { op, tab, row: op.c_row(probe)?, j: probe };
    let step = fd_step(kh_grid);
    let cells: Vec<Vec<Option<(f64, f64)>>> =
        nc_grid.par_iter().map(|&nc| kh_grid.iter().map(|&kh| p.cell(nc, kh, step).ok()).collect()).collect();
    let pick = |f: fn(&(f64, f64)) -> f64| -> Vec<Vec<f64>> {
        cells.iter().map(|r| r.iter().map(|c| c.as_ref().map_or(f64::NAN, f)).collect()).collect()
    };
    Ok(VelocityMap {
        nc_grid: nc_grid.to_vec(),
        kh_grid: kh_grid.to_vec(),
        vp: pick(|c| c.0),
        vg: pick(|c| c.1),
        valid: cells.iter().map(|r| r.iter().map(Option::is_some).collect()).collect(),
    })
}

/// Smallest kh in (0, π] at which the group velocity turns negative, located on a
/// uniform scan of `samples` points and refined by bisection to 1e-10.
pub fn group_velocity_reversal(
    op: &SpatialOperator,
    tab: &ButcherTableau,
    nc: f64,
    probe: usize,
    samples: usize,
) -> Result<Option<f64>> {
    let p = Probe { op, tab, row: op.c_row(probe)?, j: probe };
    let step = 1e-5;
    let vg = |kh: f64| p.cell(nc, kh, step).map(|c| c.1);
    let pi = std::f64::consts::PI;
    let mut prev_kh = pi / samples as f64;
    let mut prev = vg(prev_kh)?;
    if prev < 0.0 {
        return Ok(Some(prev_kh));
    }
    for i in 2..=samples {
        let kh = pi * i as f64 / samples as f64 - if i == samples { 2.0 * step } else { 0.0 };
        let v = vg(kh)?;
        if v < 0.0 {
            let (mut lo, mut hi) = (prev_kh, kh);
            while hi - lo > 1e-10 {
                let mid = 0.5 * (lo + hi);
                if vg(mid)? < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev_kh = kh;
        prev = v;
    }
    let _ = prev;
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::butcher::builtin_scheme;
    use crate::spatial::{Boundary, StencilKind};

    #[test]
    fn consistency_corner_is_near_unity() {
        let op = SpatialOperator::build(StencilKind::Lele6, 501, 1.0, Boundary::Closed).unwrap();
        let tab = builtin_scheme("IRK24").unwrap();
        let m = velocity_map(&op, &tab, &[0.05], &[0.05], 250).unwrap();
        assert!((m.vp[0][0] - 1.0).abs() < 1e-3 && (m.vg[0][0] - 1.0).abs() < 1e-3, "{m:?}");
    }

    #[test]
    fn phase_velocity_times_nc_kh_is_beta() {
        let op = SpatialOperator::build(StencilKind::Cd6, 64, 0.5, Boundary::Periodic).unwrap();
        let tab = builtin_scheme("S2B1").unwrap();
        let ncs = [0.3, 1.0, 2.0];
        let khs = [0.2, 1.0, 2.5];
        let m = velocity_map(&op, &tab, &ncs, &khs, 10).unwrap();
        let row = op.c_row(10).unwrap();
        for (i, nc) in ncs.iter().enumerate() {
            for (j, kh) in khs.iter().enumerate() {
                let sigma = nc * op.h * keq_from_row(&row, &op, kh / op.h, 10);
                let beta = unwrapped_phase(&tab, sigma).unwrap();
                assert!((m.vp[i][j] * nc * kh - beta).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_out_of_range_grids() {
        let op = SpatialOperator::build(StencilKind::Cd6, 16, 1.0, Boundary::Periodic).unwrap();
        let tab = builtin_scheme("IRK24").unwrap();
        assert!(velocity_map(&op, &tab, &[0.0], &[1.0], 3).is_err());
        assert!(velocity_map(&op, &tab, &[1.0], &[4.0], 3).is_err());
    }

    #[test]
    fn csv_has_one_line_per_cell() {
        let op = SpatialOperator::build(StencilKind::Cd6, 16, 1.0, Boundary::Periodic).unwrap();
        let tab = builtin_scheme("IRK24").unwrap();
        let m = velocity_map(&op, &tab, &[0.5, 1.0], &[0.5, 1.0, 1.5], 3).unwrap();
        assert_eq!(m.to_csv().lines().count(), 7);
    }
}
