//! Composite Gauss–Legendre quadrature.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Fixed composite rule with one refinement check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeRule {
    pub nodes_per_panel: usize,
    pub panels: usize,
    /// Accept the refined value when it differs from the base value by less than this.
    pub tol: f64,
}

impl Default for CompositeRule {
    fn default() -> Self {
        Self { nodes_per_panel: 64, panels: 16, tol: 1e-12 }
    }
}

impl CompositeRule {
    pub fn refined(self) -> Self {
        Self { panels: 2 * self.panels, ..self }
    }

    /// Sorted nodes and weights of the composite rule on [lo, hi].
    pub fn nodes(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        let (x, w) = gauss_legendre(self.nodes_per_panel);
        let width = (hi - lo) / self.panels as f64;
        let mut nodes = Vec::with_capacity(self.panels * x.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for p in 0..self.panels {
            let mid = lo + (p as f64 + 0.5) * width;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + 0.5 * width * xi);
                weights.push(0.5 * width * wi);
            }
        }
        (nodes, weights)
    }

    /// Integrates a vectorized integrand: `f` receives the sorted node list and returns values.
    pub fn apply<F>(&self, lo: f64, hi: f64, f: &F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>>,
    {
        let (x, w) = self.nodes(lo, hi);
        let vals = f(&x)?;
        Ok(vals.iter().zip(&w).map(|(v, w)| v * w).sum())
    }

    /// Base rule plus one refinement; errors if the two disagree by more than `tol`.
    pub fn integrate<F>(&self, lo: f64, hi: f64, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>>,
    {
        let coarse = self.apply(lo, hi, &f)?;
        let fine = self.refined().apply(lo, hi, &f)?;
        let delta = (fine - coarse).abs();
        if delta < self.tol {
            Ok(fine)
        } else {
            Err(Error::Quadrature { estimate: fine, delta })
        }
    }
}

/// Gauss–Legendre nodes (ascending) and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE64: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    if n == 64 {
        return CACHE64.get_or_init(|| compute_gauss_legendre(64)).clone();
    }
    compute_gauss_legendre(n)
}

fn compute_gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// P_n(z) and P_n'(z) by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
