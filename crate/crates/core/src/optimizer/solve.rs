//! Coefficient systems for the reduced two- and three-stage families and their numerical solution.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::constraints::{unknown_name, unknowns_of, Constraint, ConstraintSet};
use super::poly::Poly;
use crate::butcher::{enumerate_trees, tree_density, ButcherTableau, RootedTree};
use crate::error::{Error, Result};

/// Accepted residual (∞-norm) for two-stage solutions.
pub const TWO_STAGE_TOL: f64 = 1e-12;
/// Accepted residual (∞-norm) for three-stage solutions.
pub const THREE_STAGE_TOL: f64 = 1e-11;

const RESTARTS: usize = 64;
const MAX_ITER: usize = 200;

/// A solved coefficient set with its diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    #[serde(skip)]
    pub tableau: ButcherTableau,
    pub residual: f64,
    pub distinct_roots: usize,
    pub tie_break: String,
}

fn nvars(r: usize) -> usize {
    r + r * r
}

fn b_var(r: usize, i: usize) -> Poly {
    Poly::var(nvars(r), i)
}

fn a_var(r: usize, i: usize, j: usize) -> Poly {
    Poly::var(nvars(r), r + i * r + j)
}

fn stage_poly(t: &RootedTree, r: usize) -> Vec<Poly> {
    let n = nvars(r);
    let mut out = vec![Poly::constant(n, 1.0); r];
    for child in t.children() {
        let inner = stage_poly(child, r);
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = Poly::zero(n);
            for (j, inn) in inner.iter().enumerate() {
                s = s.add(&a_var(r, i, j).mul(inn));
            }
            *o = o.mul(&s);
        }
    }
    out
}

/// Φ(t) − 1/γ(t) as a polynomial in the unknowns.
pub fn order_condition(t: &RootedTree, r: usize) -> Poly {
    let psi = stage_poly(t, r);
    let mut phi = Poly::zero(nvars(r));
    for (i, p) in psi.iter().enumerate() {
        phi = phi.add(&b_var(r, i).mul(p));
    }
    phi.sub(&Poly::constant(nvars(r), 1.0 / tree_density(t) as f64))
}

fn trace_poly(r: usize) -> Poly {
    let mut p = Poly::zero(nvars(r));
    for i in 0..r {
        p = p.add(&a_var(r, i, i));
    }
    p
}

fn minor(r: usize, i: usize, j: usize) -> Poly {
    a_var(r, i, i).mul(&a_var(r, j, j)).sub(&a_var(r, i, j).mul(&a_var(r, j, i)))
}

/// Base equations of the zero-dissipation two-stage family with parameter Y.
pub fn two_stage_base(y: f64) -> Vec<Poly> {
    let trees = enumerate_trees(2).expect("valid order");
    let mut eqs: Vec<Poly> = trees.iter().flatten().map(|t| order_condition(t, 2)).collect();
    eqs.push(trace_poly(2).sub(&Poly::constant(6, 0.5)));
    // Y = a12 a21 − a11 a22
    eqs.push(minor(2, 0, 1).scale(-1.0).sub(&Poly::constant(6, y)));
    eqs
}

/// Base equations of the zero-dissipation three-stage family with parameter X.
///
/// Fourth-order conditions except the one for the tall tree, which follows from the rest.
pub fn three_stage_base(x: f64) -> Vec<Poly> {
    let trees = enumerate_trees(4).expect("valid order");
    let tall = RootedTree::chain(4);
    let mut eqs: Vec<Poly> = trees.iter().flatten().filter(|t| **t != tall).map(|t| order_condition(t, 3)).collect();
    eqs.push(trace_poly(3).sub(&Poly::constant(12, 0.5)));
    let xs = minor(3, 0, 1).add(&minor(3, 1, 2)).add(&minor(3, 0, 2));
    eqs.push(xs.sub(&Poly::constant(12, x)));
    eqs
}

fn closure_polys(set: &ConstraintSet, base_order: usize) -> Vec<Poly> {
    let r = set.stages();
    let n = nvars(r);
    let mut out = Vec::new();
    for c in set.items() {
        match c {
            Constraint::Linear(l) => {
                let mut p = Poly::constant(n, l.constant);
                for (i, &ci) in l.coeffs.iter().enumerate() {
                    if ci != 0.0 {
                        p = p.add(&Poly::var(n, i).scale(ci));
                    }
                }
                out.push(p);
            }
            Constraint::OrderAtLeast(p) => {
                let trees = enumerate_trees(*p).expect("valid order");
                for level in trees.iter().skip(base_order) {
                    out.extend(level.iter().map(|t| order_condition(t, r)));
                }
            }
        }
    }
    out
}

/// Polynomial system F(x) = 0 with analytic Jacobian.
pub struct System {
    eqs: Vec<Poly>,
    n: usize,
}

impl System {
    pub fn new(eqs: Vec<Poly>) -> Self {
        let n = eqs.first().map(|p| p.nvars()).unwrap_or(0);
        Self { eqs, n }
    }

    pub fn residual(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.eqs.len(), self.eqs.iter().map(|p| p.eval(x)))
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.eqs.len(), self.n);
        for (i, p) in self.eqs.iter().enumerate() {
            for (k, g) in p.grad(x).into_iter().enumerate() {
                j[(i, k)] = g;
            }
        }
        j
    }

    /// Levenberg–Marquardt iteration finishing with undamped Gauss–Newton steps.
    pub fn solve_from(&self, x0: &[f64], tol: f64) -> (Vec<f64>, f64) {
        let mut x = DVector::from_column_slice(x0);
        let mut r = self.residual(x.as_slice());
        let mut cost = r.norm_squared();
        let mut lambda: f64 = 1e-3;
        for _ in 0..MAX_ITER {
            if r.amax() <= tol * 0.01 || !cost.is_finite() {
                break;
            }
            let j = self.jacobian(x.as_slice());
            let n = self.n;
            let m = j.nrows();
            let mut aug = DMatrix::zeros(m + n, n);
            aug.view_mut((0, 0), (m, n)).copy_from(&j);
            let sl = lambda.sqrt();
            for k in 0..n {
                aug[(m + k, k)] = sl;
            }
            let mut rhs = DVector::zeros(m + n);
            rhs.rows_mut(0, m).copy_from(&(-&r));
            let Ok(step) = aug.svd(true, true).solve(&rhs, 1e-15) else {
                break;
            };
            let xn = &x + &step;
            let rn = self.residual(xn.as_slice());
            let cn = rn.norm_squared();
            if cn.is_finite() && cn < cost {
                x = xn;
                r = rn;
                cost = cn;
                lambda = (lambda / 5.0).max(1e-300);
            } else {
                lambda *= 4.0;
                if lambda > 1e12 {
                    break;
                }
            }
            if step.amax() < 1e-17 * (1.0 + x.amax()) && lambda < 1e-12 {
                break;
            }
        }
        let res = r.amax();
        (x.as_slice().to_vec(), if res.is_finite() { res } else { f64::INFINITY })
    }
}

/// Radical-inverse (Halton) point in [−1, 1]^dim.
fn halton(index: usize, dim: usize) -> Vec<f64> {
    const PRIMES: [usize; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    (0..dim)
        .map(|d| {
            let base = PRIMES[d % PRIMES.len()];
            let (mut f, mut r, mut i) = (1.0, 0.0, index + 1);
            while i > 0 {
                f /= base as f64;
                r += f * (i % base) as f64;
                i /= base;
            }
            2.0 * r - 1.0
        })
        .collect()
}

fn to_tableau(name: &str, r: usize, x: &[f64]) -> Result<ButcherTableau> {
    let b = x[..r].to_vec();
    let a = x[r..].chunks(r).map(|c| c.to_vec()).collect();
    ButcherTableau::new(name, a, b)
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

fn solve_family(
    eqs: Vec<Poly>,
    r: usize,
    tol: f64,
    reference: Option<&ButcherTableau>,
    name: &str,
) -> Result<Solution> {
    let sys = System::new(eqs);
    let dim = nvars(r);
    let reference = reference.map(unknowns_of);
    let mut starts: Vec<Vec<f64>> = reference.iter().cloned().collect();
    starts.extend((0..RESTARTS).map(|i| halton(i, dim)));
    let results: Vec<(Vec<f64>, f64)> = starts.par_iter().map(|s| sys.solve_from(s, tol)).collect();

    let best_residual = results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let mut roots: Vec<(Vec<f64>, f64)> = Vec::new();
    for (x, res) in results.into_iter().filter(|(_, res)| *res <= tol) {
        if !roots.iter().any(|(y, _)| dist(&x, y) < 1e-7) {
            roots.push((x, res));
        }
    }
    if roots.is_empty() {
        return Err(Error::NoSolution { best_residual });
    }
    let distinct_roots = roots.len();
    let (chosen, rule) = match &reference {
        Some(refx) => {
            let best = roots.iter().min_by(|p, q| dist(&p.0, refx).total_cmp(&dist(&q.0, refx))).expect("non-empty");
            (best.clone(), format!("nearest to published row (distance {:.3e})", dist(&best.0, refx)))
        }
        None => {
            let max_a = |x: &[f64]| x[r..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let bounded: Vec<_> = roots.iter().filter(|p| p.0.iter().all(|v| v.abs() <= 3.0)).collect();
            let pool: Vec<_> = if bounded.is_empty() { roots.iter().collect() } else { bounded };
            let best = pool.into_iter().min_by(|p, q| max_a(&p.0).total_cmp(&max_a(&q.0))).expect("non-empty");
            (best.clone(), format!("smallest max|a_rs| = {:.6}", max_a(&best.0)))
        }
    };
    Ok(Solution { tableau: to_tableau(name, r, &chosen.0)?, residual: chosen.1, distinct_roots, tie_break: rule })
}

fn check_closures(set: &ConstraintSet, stages: usize, needed: usize, base_order: usize) -> Result<()> {
    if set.stages() != stages {
        return Err(Error::Dimension(format!("closures were parsed for {} stages, expected {stages}", set.stages())));
    }
    let count = set.equation_count(base_order);
    if count < needed {
        return Err(Error::Dimension(format!(
            "{count} closure equations leave the system underdetermined; {needed} are needed"
        )));
    }
    Ok(())
}

/// Solves the two-stage system for a given Y and closures.
pub fn solve_two_stage(y: f64, closures: &ConstraintSet, reference: Option<&ButcherTableau>) -> Result<Solution> {
    check_closures(closures, 2, 2, 2)?;
    let mut eqs = two_stage_base(y);
    eqs.extend(closure_polys(closures, 2));
    let name = reference.map_or("derived", |t| t.name());
    solve_family(eqs, 2, TWO_STAGE_TOL, reference, name)
}

/// Solves the three-stage system for a given X and closures.
pub fn solve_three_stage(x: f64, closures: &ConstraintSet, reference: Option<&ButcherTableau>) -> Result<Solution> {
    check_closures(closures, 3, 3, 4)?;
    let mut eqs = three_stage_base(x);
    eqs.extend(closure_polys(closures, 4));
    let name = reference.map_or("derived", |t| t.name());
    solve_family(eqs, 3, THREE_STAGE_TOL, reference, name)
}

/// Human-readable listing of a solution's coefficients.
pub fn describe(tab: &ButcherTableau) -> String {
    let x = unknowns_of(tab);
    x.iter()
        .enumerate()
        .map(|(i, v)| format!("{} = {v:.12}", unknown_name(tab.stages(), i)))
        .collect::<Vec<_>>()
        .join("\n")
}
