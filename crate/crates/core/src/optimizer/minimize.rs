//! Derivative-free 1-D minimization: golden-section steps with parabolic interpolation.

const GOLDEN: f64 = 0.381_966_011_250_105_1; // (3 − √5)/2

/// Result of a bracketed minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
}

/// Minimizes `f` on [lo, hi], stopping once the bracket is narrower than `width`.
pub fn minimize_bracketed<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    lo: f64,
    hi: f64,
    width: f64,
) -> Result<Minimum, E> {
    let (mut a, mut b) = if lo < hi { (lo, hi) } else { (hi, lo) };
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x)?;
    let (mut fw, mut fv) = (fx, fx);
    let mut evaluations = 1;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for _ in 0..500 {
        let m = 0.5 * (a + b);
        let tol1 = f64::EPSILON.sqrt() * 1e-4 * x.abs() + width / 4.0;
        let tol2 = 2.0 * tol1;
        if b - a <= width || (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            // parabola through (v, fv), (w, fw), (x, fx)
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u)?;
        evaluations += 1;
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok(Minimum { x, fx, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let m = minimize_bracketed(|x| Ok::<_, ()>((x - 0.3).powi(2)), -1.0, 2.0, 1e-12).unwrap();
        assert!((m.x - 0.3).abs() < 1e-10);
        assert!(m.fx < 1e-20);
    }

    #[test]
    fn handles_non_polynomial_objectives() {
        let m = minimize_bracketed(|x: f64| Ok::<_, ()>(x.cosh() - 0.5 * x), -3.0, 3.0, 1e-12).unwrap();
        // d/dx: sinh x = 1/2
        assert!((m.x - 0.5f64.asinh()).abs() < 1e-8);
    }

    #[test]
    fn minimum_at_edge_stays_in_bracket() {
        let m = minimize_bracketed(|x| Ok::<_, ()>(x), 0.0, 1.0, 1e-10).unwrap();
        assert!(m.x >= 0.0 && m.x < 1e-8);
    }

    #[test]
    fn propagates_errors() {
        let r = minimize_bracketed(|_| Err::<f64, _>("boom"), 0.0, 1.0, 1e-10);
        assert_eq!(r.unwrap_err(), "boom");
    }
}
