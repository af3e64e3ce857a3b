//! Sparse storage, banded LU and a Krylov solver for the stage systems.

mod banded;
mod krylov;

pub use banded::{BandedLu, BandedMatrix};
pub use krylov::{bicgstab, KrylovReport};

use crate::error::Result;

/// Matrix-vector product interface shared by assembled and matrix-free operators.
pub trait LinearOp: Send + Sync {
    fn dim(&self) -> usize;
    /// y = Op x
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn diagonal(&self) -> Vec<f64>;
}

/// Compressed sparse row matrix (square).
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    /// Builds from per-row (column, value) lists; duplicate columns are summed, zeros dropped.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), n, "row count");
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                assert!(c < n, "column {c} out of range");
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        let mut m = Self { n, row_ptr, cols, vals };
        m.drop_zeros();
        m
    }

    pub fn identity(n: usize) -> Self {
        Self { n, row_ptr: (0..=n).collect(), cols: (0..n).collect(), vals: vec![1.0; n] }
    }

    fn drop_zeros(&mut self) {
        let mut row_ptr = vec![0];
        let (mut cols, mut vals) = (Vec::new(), Vec::new());
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.vals[k] != 0.0 {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr.push(cols.len());
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut m = self.clone();
        m.vals.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// Row-scaled copy: row i multiplied by d[i] on the right, i.e. self · diag(d).
    pub fn mul_diag_right(&self, d: &[f64]) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                m.vals[k] *= d[m.cols[k]];
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                rows[j].push((i, v));
            }
        }
        Self::from_rows(self.n, rows)
    }

    /// Largest |i − j| over the stored entries under a node permutation (`perm[i]` = new index).
    pub fn bandwidth_under(&self, perm: &[usize]) -> usize {
        (0..self.n).flat_map(|i| self.row(i).map(move |(j, _)| perm[i].abs_diff(perm[j]))).max().unwrap_or(0)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.apply(x, &mut y);
        y
    }
}

impl LinearOp for Csr {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

/// Symmetric "zig-zag" node order 0, n−1, 1, n−2, … that keeps periodic wrap-around
/// couplings close to the diagonal. Returns `perm[node]` = position.
pub fn zigzag_order(n: usize) -> Vec<usize> {
    (0..n).map(|i| if 2 * i < n { 2 * i } else { 2 * (n - 1 - i) + 1 }).collect()
}

/// Whichever of the natural and zig-zag orders yields the smaller bandwidth for `m`.
pub fn narrow_order(m: &Csr) -> Vec<usize> {
    let natural: Vec<usize> = (0..m.n()).collect();
    let zz = zigzag_order(m.n());
    if m.bandwidth_under(&zz) < m.bandwidth_under(&natural) {
        zz
    } else {
        natural
    }
}

/// Band LU of a sparse matrix under a bandwidth-reducing node order.
#[derive(Debug, Clone)]
pub struct SparseLu {
    perm: Vec<usize>,
    lu: BandedLu,
}

impl SparseLu {
    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; b.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            y[p] = b[i];
        }
        self.lu.solve_in_place(&mut y);
        self.perm.iter().map(|&p| y[p]).collect()
    }
}

/// Factors `m` after reordering its nodes with [`narrow_order`].
pub fn factor_csr(m: &Csr) -> Result<SparseLu> {
    let perm = narrow_order(m);
    let n = m.n();
    let (mut kl, mut ku) = (0, 0);
    for i in 0..n {
        for (j, _) in m.row(i) {
            let (pi, pj) = (perm[i], perm[j]);
            if pj < pi {
                kl = kl.max(pi - pj);
            } else {
                ku = ku.max(pj - pi);
            }
        }
    }
    let mut b = BandedMatrix::zeros(n, kl, ku);
    for i in 0..n {
        for (j, v) in m.row(i) {
            b.add(perm[i], perm[j], v);
        }
    }
    Ok(SparseLu { perm, lu: b.factor()? })
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
