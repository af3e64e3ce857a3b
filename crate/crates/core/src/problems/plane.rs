use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::LinearOp;
use crate::spatial::{stencil, StencilKind};
use crate::timeloop::{LinearOde, SolverKind, StepOptions, System};

use super::{ErrorMetric, Problem};

/// −c ∂x − d ∂y on a doubly periodic n×n grid, applying an explicit 1D stencil along
/// rows and columns. Values are stored row-major: u[iy·n + ix].
#[derive(Debug, Clone)]
pub struct PlaneOperator {
    pub n: usize,
    pub h: f64,
    pub c: f64,
    pub d: f64,
    /// Antisymmetric weights c_j / h for offsets j = 1..=w.
    weights: Vec<f64>,
}

impl PlaneOperator {
    pub fn new(kind: StencilKind, n: usize, h: f64, c: f64, d: f64) -> Result<Self> {
        let st = stencil(kind)?;
        if !st.is_explicit() {
            return Err(Error::Unsupported(format!("{kind} is compact; the plane operator needs an explicit stencil")));
        }
        if n < 2 * st.half_width() + 1 {
            return Err(Error::Dimension(format!("{n} nodes per side is too few for {kind}")));
        }
        Ok(Self { n, h, c, d, weights: st.rhs.iter().map(|w| w / h).collect() })
    }
}

impl LinearOp for PlaneOperator {
    fn dim(&self) -> usize {
        self.n * self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        y.par_chunks_mut(n).enumerate().for_each(|(iy, row)| {
            for (ix, out) in row.iter_mut().enumerate() {
                let (mut dx, mut dy) = (0.0, 0.0);
                for (j, w) in self.weights.iter().enumerate() {
                    let s = j + 1;
                    let (xp, xm) = ((ix + s) % n, (ix + n - s) % n);
                    let (yp, ym) = ((iy + s) % n, (iy + n - s) % n);
                    dx += w * (x[iy * n + xp] - x[iy * n + xm]);
                    dy += w * (x[yp * n + ix] - x[ym * n + ix]);
                }
                *out = -self.c * dx - self.d * dy;
            }
        });
    }

    fn diagonal(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }
}

/// u_t + c u_x + d u_y = 0 on a periodic square with a Gaussian-modulated plane wave
/// e^{−r²/b} sin(kx x + ky y). The Gaussian is summed over nearby periodic images so the
/// datum is periodic.
pub struct Convection2d {
    pub name: String,
    pub kind: StencilKind,
    pub n: usize,
    pub h: f64,
    pub c: f64,
    pub d: f64,
    pub center: (f64, f64),
    pub b: f64,
    pub kx: f64,
    pub ky: f64,
    pub t_end: f64,
    sys: LinearOde,
}

impl Convection2d {
    #[allow(clippy::too_many_arguments)]
    pub fn new(name: &str, kind: StencilKind, n: usize, h: f64, b: f64, k: (f64, f64), t_end: f64) -> Result<Self> {
        let (c, d) = (0.5, 0.5);
        let op = PlaneOperator::new(kind, n, h, c, d)?;
        let l = n as f64 * h;
        Ok(Self {
            name: name.into(),
            kind,
            n,
            h,
            c,
            d,
            center: (0.5 * l, 0.5 * l),
            b,
            kx: k.0,
            ky: k.1,
            t_end,
            sys: LinearOde::matrix_free(Box::new(op)),
        })
    }

    /// Two-stage configuration (FDo13p, b = 0.2, t = 3) or three-stage configuration
    /// (FDs13p, b = 20, t = 7.2) on [0, side)² with Δ = 0.1 and kx = ky = 2π.
    pub fn problem6(stages: usize, side: f64) -> Result<Self> {
        let h = 0.1;
        let n = (side / h).round() as usize;
        let k = (std::f64::consts::TAU, std::f64::consts::TAU);
        match stages {
            2 => Self::new("problem6", StencilKind::FDo13p, n, h, 0.2, k, 3.0),
            3 => Self::new("problem6", StencilKind::FDs13p, n, h, 20.0, k, 7.2),
            _ => Err(Error::Config(format!("problem 6 is defined for two or three stages, not {stages}"))),
        }
    }

    pub fn side(&self) -> f64 {
        self.n as f64 * self.h
    }

    pub fn exact_at(&self, x: f64, y: f64, t: f64) -> f64 {
        let l = self.side();
        let (x0, y0) = (x - self.c * t, y - self.d * t);
        let wrap = |v: f64, m: f64| {
            let r = (v - m).rem_euclid(l);
            if r >= 0.5 * l {
                r - l
            } else {
                r
            }
        };
        let (ex, ey) = (wrap(x0, self.center.0), wrap(y0, self.center.1));
        // images reach |offset| ≤ 2L; enough for Gaussians narrower than the box
        let g = |e: f64| (-2..=2).map(|m| (-(e + m as f64 * l).powi(2) / self.b).exp()).sum::<f64>();
        g(ex) * g(ey) * (self.kx * x0 + self.ky * y0).sin()
    }

    /// Exact solution of the semi-discrete system u' = −c Dx u − d Dy u at time t, by
    /// evolving each discrete Fourier mode of the initial field with its stencil symbol.
    /// Differences from a time-stepped state are purely temporal error.
    pub fn semi_discrete(&self, t: f64) -> Result<Vec<f64>> {
        let n = self.n;
        let st = stencil(self.kind)?;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut f: Vec<Complex64> = self.initial().into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        let fft2 = |data: &mut Vec<Complex64>, plan: &std::sync::Arc<dyn rustfft::Fft<f64>>| {
            data.par_chunks_mut(n).for_each(|row| plan.process(row));
            let mut tr = vec![Complex64::new(0.0, 0.0); n * n];
            transpose(data, &mut tr, n);
            tr.par_chunks_mut(n).for_each(|row| plan.process(row));
            transpose(&tr, data, n);
        };
        fft2(&mut f, &fwd);
        // symbol(θ)/h for the mode with phase θ = 2πm/n per cell
        let lam: Vec<f64> = (0..n).map(|m| st.symbol(std::f64::consts::TAU * m as f64 / n as f64) / self.h).collect();
        for (idx, v) in f.iter_mut().enumerate() {
            let (p, q) = (idx % n, idx / n);
            *v *= Complex64::from_polar(1.0 / (n * n) as f64, -(self.c * lam[p] + self.d * lam[q]) * t);
        }
        fft2(&mut f, &inv);
        Ok(f.into_iter().map(|z| z.re).collect())
    }
}

fn transpose(a: &[Complex64], b: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            b[j * n + i] = a[i * n + j];
        }
    }
}

impl Problem for Convection2d {
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
        let n = self.n;
        (0..n * n).into_par_iter().map(|k| self.exact_at((k % n) as f64 * self.h, (k / n) as f64 * self.h, t)).collect()
    }

    fn metric(&self) -> ErrorMetric {
        ErrorMetric::Rms
    }

    fn t_end(&self) -> f64 {
        self.t_end
    }

    fn dt_from_cfl(&self, nc: f64) -> Option<f64> {
        Some(nc * self.h / self.c)
    }

    fn step_options(&self) -> StepOptions {
        StepOptions { solver: SolverKind::Krylov, ..Default::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_differentiates_plane_waves() {
        // the discrete derivative of a Fourier mode is its stencil symbol times the mode
        let n = 64;
        let h = 0.1;
        let op = PlaneOperator::new(StencilKind::FDs13p, n, h, 0.5, 0.25).unwrap();
        let l = n as f64 * h;
        let k = std::f64::consts::TAU * 3.0 / l;
        let u: Vec<f64> = (0..n * n).map(|i| (k * (i % n) as f64 * h + 2.0 * k * (i / n) as f64 * h).sin()).collect();
        let mut y = vec![0.0; n * n];
        op.apply(&u, &mut y);
        let st = stencil(StencilKind::FDs13p).unwrap();
        let amp = (0.5 * st.symbol(k * h) + 0.25 * st.symbol(2.0 * k * h)) / h;
        for i in 0..n * n {
            let (x, yy) = ((i % n) as f64 * h, (i / n) as f64 * h);
            let exact = -amp * (k * x + 2.0 * k * yy).cos();
            assert!((y[i] - exact).abs() < 1e-12, "{i}");
        }
        // and the symbol is close to the true wavenumber at this resolution
        assert!((amp - k).abs() < 1e-6 * k);
    }

    #[test]
    fn semi_discrete_solution_matches_fine_time_stepping() {
        use crate::butcher::builtin_scheme;
        use crate::problems::run_problem;
        let mut p = Convection2d::new("small", StencilKind::FDs13p, 40, 0.25, 2.0, (1.0, 0.5), 1.0).unwrap();
        p.center = (5.0, 5.0);
        let tab = builtin_scheme("IRK36").unwrap();
        let out = run_problem(&p, &tab, 0.05, None).unwrap();
        let sd = p.semi_discrete(1.0).unwrap();
        let diff = ErrorMetric::Rms.eval(&out.state, &sd);
        assert!(diff < 1e-10, "{diff}");
        // the semi-discrete and exact solutions differ by the spatial error only
        assert!(ErrorMetric::Rms.eval(&sd, &p.exact(1.0)) > 1e3 * diff);
        let back = p.semi_discrete(0.0).unwrap();
        assert!(ErrorMetric::Rms.eval(&back, &p.initial()) < 1e-14);
    }

    #[test]
    fn compact_kinds_are_rejected() {
        assert!(PlaneOperator::new(StencilKind::Lele6, 50, 0.1, 1.0, 1.0).is_err());
        assert!(PlaneOperator::new(StencilKind::FDo13p, 8, 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn exact_solution_is_periodic_and_transported() {
        let p = Convection2d::problem6(3, 20.0).unwrap();
        let a = p.exact_at(3.3, 17.1, 0.0);
        assert!((a - p.exact_at(23.3, -2.9, 0.0)).abs() < 1e-12);
        assert!((p.exact_at(4.3, 18.1, 2.0) - a).abs() < 1e-12);
        assert_eq!(p.error(&p.initial(), 0.0), 0.0);
        assert!((p.dt_from_cfl(0.6).unwrap() - 0.12).abs() < 1e-15);
    }

    #[test]
    fn exact_solution_satisfies_the_pde() {
        let p = Convection2d::problem6(2, 20.0).unwrap();
        let e = 1e-5;
        for i in 0..20 {
            let (x, y, t) = (9.0 + 0.1 * i as f64, 9.5 + 0.07 * i as f64, 0.05 * i as f64);
            let ut = (p.exact_at(x, y, t + e) - p.exact_at(x, y, t - e)) / (2.0 * e);
            let ux = (p.exact_at(x + e, y, t) - p.exact_at(x - e, y, t)) / (2.0 * e);
            let uy = (p.exact_at(x, y + e, t) - p.exact_at(x, y - e, t)) / (2.0 * e);
            assert!((ut + p.c * ux + p.d * uy).abs() < 1e-6);
        }
    }
}
