use crate::error::{Error, Result};

use super::norm2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovReport {
    pub iterations: usize,
    /// Final ‖b − A x‖₂ / ‖b‖₂.
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Right-preconditioned BiCGSTAB with a diagonal (Jacobi) preconditioner.
///
/// `x` holds the initial guess on entry and the solution on return. Zero entries of
/// `diag` fall back to the identity.
pub fn bicgstab(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<KrylovReport> {
    let n = b.len();
    let inv: Vec<f64> = diag.iter().map(|d| if *d != 0.0 { 1.0 / d } else { 1.0 }).collect();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(KrylovReport { iterations: 0, relative_residual: 0.0 });
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut res = norm2(&r) / bnorm;
    if res <= tol {
        return Ok(KrylovReport { iterations: 0, relative_residual: res });
    }
    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            y[i] = inv[i] * p[i];
        }
        apply(&y, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm2(&s) / bnorm <= tol {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            res = true_residual(&apply, b, x) / bnorm;
            return Ok(KrylovReport { iterations: it, relative_residual: res });
        }
        for i in 0..n {
            z[i] = inv[i] * s[i];
        }
        apply(&z, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        res = norm2(&r) / bnorm;
        if res <= tol {
            res = true_residual(&apply, b, x) / bnorm;
            return Ok(KrylovReport { iterations: it, relative_residual: res });
        }
        if omega == 0.0 || !res.is_finite() {
            break;
        }
    }
    Err(Error::LinearSolver { residual: res, iterations: max_iter })
}

fn true_residual(apply: &impl Fn(&[f64], &mut [f64]), b: &[f64], x: &[f64]) -> f64 {
    let mut ax = vec![0.0; b.len()];
    apply(x, &mut ax);
    ax.iter().zip(b).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Csr, LinearOp};

    #[test]
    fn solves_nonsymmetric_system() {
        let n = 200;
        // I + skew circulant coupling: the shape of a stage matrix for convection
        let m = Csr::from_rows(
            n,
            (0..n).map(|i| vec![(i, 1.0), ((i + 1) % n, 0.7), ((i + n - 1) % n, -0.7), ((i + 2) % n, -0.1)]).collect(),
        );
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
        let b = m.mul_vec(&x_true);
        let mut x = vec![0.0; n];
        let rep = bicgstab(|u, v| m.apply(u, v), &m.diagonal(), &b, &mut x, 1e-12, 500).unwrap();
        assert!(rep.relative_residual <= 1e-11, "{rep:?}");
        for (a, e) in x.iter().zip(&x_true) {
            assert!((a - e).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let m = Csr::identity(3);
        let mut x = vec![1.0; 3];
        bicgstab(|u, v| m.apply(u, v), &[1.0; 3], &[0.0; 3], &mut x, 1e-12, 10).unwrap();
        assert_eq!(x, vec![0.0; 3]);
    }

    #[test]
    fn reports_non_convergence() {
        let n = 50;
        let m = Csr::from_rows(n, (0..n).map(|i| vec![((i + 1) % n, 1.0), ((i + n - 1) % n, -1.0)]).collect());
        let b: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mut x = vec![0.0; n];
        assert!(bicgstab(|u, v| m.apply(u, v), &m.diagonal(), &b, &mut x, 1e-14, 3).is_err());
    }
}
