//! First-derivative operators M1 f' = M2 f, equivalent wavenumbers and velocity maps.

mod stencil;
mod velocity;

pub use stencil::{parse_stencils, stencil, Stencil, DATA_ENV};
pub use velocity::{group_velocity_reversal, velocity_map, VelocityMap};

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{factor_csr, Csr, SparseLu};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StencilKind {
    Lele6,
    #[serde(rename = "CD6")]
    Cd6,
    FDs13p,
    FDo13p,
}

impl StencilKind {
    pub const ALL: [StencilKind; 4] = [StencilKind::Lele6, StencilKind::Cd6, StencilKind::FDs13p, StencilKind::FDo13p];
}

impl fmt::Display for StencilKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StencilKind::Lele6 => "Lele6",
            StencilKind::Cd6 => "CD6",
            StencilKind::FDs13p => "FDs13p",
            StencilKind::FDo13p => "FDo13p",
        })
    }
}

impl FromStr for StencilKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StencilKind::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Data(format!("unknown operator kind `{s}` (expected Lele6, CD6, FDs13p or FDo13p)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Closed,
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" => Ok(Boundary::Periodic),
            "closed" => Ok(Boundary::Closed),
            _ => Err(Error::Data(format!("unknown boundary `{s}`"))),
        }
    }
}

/// Serializable operator description, as used in run configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub kind: StencilKind,
    pub n: usize,
    pub h: f64,
    pub boundary: Boundary,
}

/// Derivative operator on a uniform grid: M1 f' = M2 f, with 1/h folded into M2.
///
/// Periodic grids have nodes x_i = i h, i < n; closed grids include both end points.
#[derive(Debug, Clone)]
pub struct SpatialOperator {
    pub kind: StencilKind,
    pub n: usize,
    pub h: f64,
    pub boundary: Boundary,
    pub m1: Csr,
    pub m2: Csr,
}

type Rows = Vec<Vec<(usize, f64)>>;

impl SpatialOperator {
    pub fn build(kind: StencilKind, n: usize, h: f64, boundary: Boundary) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Dimension(format!("grid spacing must be positive, got {h}")));
        }
        let st = stencil(kind)?;
        let w = st.half_width();
        if n < 2 * w + 1 {
            return Err(Error::Dimension(format!("{kind} needs at least {} nodes, got {n}", 2 * w + 1)));
        }
        let (m1, m2) = match boundary {
            Boundary::Periodic => periodic_rows(st, n, h),
            Boundary::Closed => closed_rows(kind, st, n, h)?,
        };
        Ok(Self { kind, n, h, boundary, m1: Csr::from_rows(n, m1), m2: Csr::from_rows(n, m2) })
    }

    pub fn from_spec(spec: &OperatorSpec) -> Result<Self> {
        Self::build(spec.kind, spec.n, spec.h, spec.boundary)
    }

    pub fn spec(&self) -> OperatorSpec {
        OperatorSpec { kind: self.kind, n: self.n, h: self.h, boundary: self.boundary }
    }

    pub fn is_explicit(&self) -> bool {
        (0..self.n).all(|i| self.m1.row(i).all(|(j, v)| (i == j && v == 1.0) || v == 0.0))
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Band factorization of M1 (or of its transpose).
    pub fn factor_m1(&self, transpose: bool) -> Result<SparseLu> {
        let m = if transpose { self.m1.transpose() } else { self.m1.clone() };
        factor_csr(&m)
    }

    /// Approximate derivative of nodal values.
    pub fn derivative(&self, u: &[f64]) -> Result<Vec<f64>> {
        let rhs = self.m2.mul_vec(u);
        if self.is_explicit() {
            return Ok(rhs);
        }
        Ok(self.factor_m1(false)?.solve(&rhs))
    }

    /// Row `j` of C = M1⁻¹ M2, obtained from one solve with M1ᵀ.
    pub fn c_row(&self, j: usize) -> Result<Vec<(usize, f64)>> {
        if j >= self.n {
            return Err(Error::Dimension(format!("node {j} outside grid of {}", self.n)));
        }
        let mut e = vec![0.0; self.n];
        e[j] = 1.0;
        let w = if self.is_explicit() { e } else { self.factor_m1(true)?.solve(&e) };
        let mut row = vec![0.0; self.n];
        for (i, wi) in w.iter().enumerate() {
            if *wi != 0.0 {
                for (l, v) in self.m2.row(i) {
                    row[l] += wi * v;
                }
            }
        }
        Ok(row.into_iter().enumerate().filter(|e| e.1 != 0.0).collect())
    }

    /// Equivalent wavenumber [k_eq]_j = i Σ_l C_jl e^{−ik(x_l − x_j)}.
    pub fn keq(&self, k: f64, j: usize) -> Result<Complex64> {
        Ok(keq_from_row(&self.c_row(j)?, self, k, j))
    }

    /// Eliminates nodes whose values are prescribed (Dirichlet), returning the operator
    /// acting on the remaining nodes.
    pub fn reduce(&self, pinned: &[usize]) -> Result<ReducedOperator> {
        reduce(self, pinned)
    }
}

pub(crate) fn keq_from_row(row: &[(usize, f64)], op: &SpatialOperator, k: f64, j: usize) -> Complex64 {
    let n = op.n as isize;
    // periodic grids use the nearest image of each node
    let offset = |l: usize| -> f64 {
        let d = l as isize - j as isize;
        let d = match op.boundary {
            Boundary::Periodic if 2 * d >= n => d - n,
            Boundary::Periodic if 2 * d < -n => d + n,
            _ => d,
        };
        d as f64 * op.h
    };
    let s: Complex64 = row.iter().map(|&(l, c)| c * Complex64::from_polar(1.0, -k * offset(l))).sum();
    Complex64::i() * s
}

fn periodic_rows(st: &Stencil, n: usize, h: f64) -> (Rows, Rows) {
    let mut m1 = Vec::with_capacity(n);
    let mut m2 = Vec::with_capacity(n);
    for i in 0..n {
        let mut r1 = vec![(i, 1.0)];
        for (j, a) in st.lhs.iter().enumerate() {
            r1.push(((i + n - (j + 1)) % n, *a));
            r1.push(((i + j + 1) % n, *a));
        }
        let mut r2 = Vec::new();
        for (j, c) in st.rhs.iter().enumerate() {
            r2.push(((i + j + 1) % n, c / h));
            r2.push(((i + n - (j + 1)) % n, -c / h));
        }
        m1.push(r1);
        m2.push(r2);
    }
    (m1, m2)
}

/// Near-boundary rows as (M1 entries, M2 entries) in offsets from the left end; the right
/// end uses the mirror image with negated M2.
type Closure = Vec<(Vec<(usize, f64)>, Vec<(usize, f64)>)>;

fn closure(kind: StencilKind) -> Option<Closure> {
    match kind {
        // third-order compact boundary row, then the fourth-order Padé row
        StencilKind::Lele6 => Some(vec![
            (vec![(0, 1.0), (1, 2.0)], vec![(0, -2.5), (1, 2.0), (2, 0.5)]),
            (vec![(0, 0.25), (1, 1.0), (2, 0.25)], vec![(0, -0.75), (2, 0.75)]),
        ]),
        // explicit fourth-order one-sided and central rows
        StencilKind::Cd6 => Some(vec![
            (vec![(0, 1.0)], vec![(0, -25.0 / 12.0), (1, 4.0), (2, -3.0), (3, 4.0 / 3.0), (4, -0.25)]),
            (vec![(1, 1.0)], vec![(0, -0.25), (1, -5.0 / 6.0), (2, 1.5), (3, -0.5), (4, 1.0 / 12.0)]),
            (vec![(2, 1.0)], vec![(0, 1.0 / 12.0), (1, -2.0 / 3.0), (3, 2.0 / 3.0), (4, -1.0 / 12.0)]),
        ]),
        StencilKind::FDs13p | StencilKind::FDo13p => None,
    }
}

fn closed_rows(kind: StencilKind, st: &Stencil, n: usize, h: f64) -> Result<(Rows, Rows)> {
    let cl = closure(kind)
        .ok_or_else(|| Error::Unsupported(format!("{kind} has no closed-boundary closure; use a periodic grid")))?;
    let nb = cl.len();
    let mut m1: Rows = vec![Vec::new(); n];
    let mut m2: Rows = vec![Vec::new(); n];
    for (i, (r1, r2)) in cl.iter().enumerate() {
        m1[i] = r1.clone();
        m2[i] = r2.iter().map(|&(j, v)| (j, v / h)).collect();
        let ir = n - 1 - i;
        m1[ir] = r1.iter().map(|&(j, v)| (n - 1 - j, v)).collect();
        m2[ir] = r2.iter().map(|&(j, v)| (n - 1 - j, -v / h)).collect();
    }
    for i in nb..n - nb {
        let mut r1 = vec![(i, 1.0)];
        for (j, a) in st.lhs.iter().enumerate() {
            r1.push((i - (j + 1), *a));
            r1.push((i + j + 1, *a));
        }
        let mut r2 = Vec::new();
        for (j, c) in st.rhs.iter().enumerate() {
            r2.push((i + j + 1, c / h));
            r2.push((i - (j + 1), -c / h));
        }
        m1[i] = r1;
        m2[i] = r2;
    }
    Ok((m1, m2))
}

/// Operator on the free nodes after eliminating pinned values:
/// M1' f'_free = M2' u_free + B u_pinned.
#[derive(Debug, Clone)]
pub struct ReducedOperator {
    pub free: Vec<usize>,
    pub pinned: Vec<usize>,
    pub m1: Csr,
    pub m2: Csr,
    /// B, stored per free row as (index into `pinned`, coefficient).
    pub coupling: Vec<Vec<(usize, f64)>>,
}

impl ReducedOperator {
    /// B u_pinned.
    pub fn boundary_term(&self, pinned_values: &[f64]) -> Vec<f64> {
        self.coupling.iter().map(|row| row.iter().map(|&(p, v)| v * pinned_values[p]).sum()).collect()
    }

    pub fn scatter(&self, free_values: &[f64], pinned_values: &[f64], n: usize) -> Vec<f64> {
        let mut u = vec![0.0; n];
        for (k, &i) in self.free.iter().enumerate() {
            u[i] = free_values[k];
        }
        for (k, &i) in self.pinned.iter().enumerate() {
            u[i] = pinned_values[k];
        }
        u
    }
}

fn reduce(op: &SpatialOperator, pinned: &[usize]) -> Result<ReducedOperator> {
    let n = op.n;
    let mut pinned = pinned.to_vec();
    pinned.sort_unstable();
    pinned.dedup();
    if pinned.iter().any(|&p| p >= n) || pinned.len() >= n {
        return Err(Error::Dimension("pinned nodes must be distinct grid nodes, leaving at least one free".into()));
    }
    let np = pinned.len();
    let mut pos = vec![None; n];
    let free: Vec<usize> = (0..n).filter(|i| pinned.binary_search(i).is_err()).collect();
    for (k, &i) in free.iter().enumerate() {
        pos[i] = Some(k);
    }
    let mut m1pp = DMatrix::zeros(np, np);
    for (a, &p) in pinned.iter().enumerate() {
        for (b, &q) in pinned.iter().enumerate() {
            m1pp[(a, b)] = op.m1.get(p, q);
        }
    }
    let inv = m1pp.try_inverse().ok_or(Error::Factorization { row: 0, pivot: 0.0 })?;
    // W1 = M1pp⁻¹ M1p·, W2 = M1pp⁻¹ M2p·, dense over all n columns (np is small)
    let mut w1 = vec![vec![0.0; n]; np];
    let mut w2 = vec![vec![0.0; n]; np];
    for a in 0..np {
        for (b, &q) in pinned.iter().enumerate() {
            let c = inv[(a, b)];
            if c == 0.0 {
                continue;
            }
            for (j, v) in op.m1.row(q) {
                w1[a][j] += c * v;
            }
            for (j, v) in op.m2.row(q) {
                w2[a][j] += c * v;
            }
        }
    }
    let pin_pos = |j: usize| pinned.binary_search(&j).ok();
    let mut r1 = Vec::with_capacity(free.len());
    let mut r2 = Vec::with_capacity(free.len());
    let mut coupling = Vec::with_capacity(free.len());
    for &i in &free {
        let mut d1 = std::collections::BTreeMap::<usize, f64>::new();
        let mut d2 = std::collections::BTreeMap::<usize, f64>::new();
        for (j, v) in op.m1.row(i) {
            *d1.entry(j).or_default() += v;
        }
        for (j, v) in op.m2.row(i) {
            *d2.entry(j).or_default() += v;
        }
        for (j, v) in op.m1.row(i) {
            if let Some(a) = pin_pos(j) {
                for (col, w) in w1[a].iter().enumerate().filter(|e| *e.1 != 0.0) {
                    *d1.entry(col).or_default() -= v * w;
                }
                for (col, w) in w2[a].iter().enumerate().filter(|e| *e.1 != 0.0) {
                    *d2.entry(col).or_default() -= v * w;
                }
            }
        }
        let keep = |d: &std::collections::BTreeMap<usize, f64>| -> Vec<(usize, f64)> {
            d.iter()
                .filter_map(|(&j, &v)| pos[j].map(|k| (k, v)))
                .filter(|e| e.1.abs() > 1e-15 * (1.0 + e.1.abs()))
                .collect()
        };
        r1.push(keep(&d1));
        r2.push(keep(&d2));
        coupling.push(d2.iter().filter_map(|(&j, &v)| pin_pos(j).map(|a| (a, v))).filter(|e| e.1 != 0.0).collect());
    }
    let nf = free.len();
    Ok(ReducedOperator { free, pinned, m1: Csr::from_rows(nf, r1), m2: Csr::from_rows(nf, r2), coupling })
}
