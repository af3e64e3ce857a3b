//! Amplification factor of a tableau on u' = Iλu and the derived dissipation/dispersion errors.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::butcher::ButcherTableau;
use crate::dd::{CDd, Dd};
use crate::error::{Error, Result};
use crate::quadrature::CompositeRule;

const I: Complex64 = Complex64::new(0.0, 1.0);
const TWO_PI: f64 = 2.0 * PI;

/// Relative determinant threshold for declaring the stage matrix singular.
pub const SINGULAR_TOL: f64 = 1e-14;

/// Coefficients below this are treated as zero when reading off orders.
pub const ORDER_COEFF_TOL: f64 = 1e-9;

/// Number of series terms examined by the order functions.
const SERIES_TERMS: usize = 16;

/// G_N(σ) = 1 + Iσ bᵀ(I − IσA)⁻¹1 for real σ.
pub fn amplification(tab: &ButcherTableau, sigma: f64) -> Result<Complex64> {
    amplification_complex(tab, Complex64::new(sigma, 0.0))
}

/// Amplification factor for complex σ (non-periodic spatial operators give complex k_eq).
pub fn amplification_complex(tab: &ButcherTableau, sigma: Complex64) -> Result<Complex64> {
    if sigma == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let r = tab.stages();
    let z = I * sigma;
    let mut m = vec![Complex64::new(0.0, 0.0); r * r];
    for i in 0..r {
        for j in 0..r {
            m[i * r + j] = -z * tab.a(i, j);
        }
        m[i * r + i] += 1.0;
    }
    let x = solve_small(&mut m, vec![Complex64::new(1.0, 0.0); r], r).ok_or(Error::Singular { sigma: sigma.re })?;
    let s: Complex64 = tab.b().iter().zip(&x).map(|(b, x)| x * *b).sum();
    Ok(1.0 + z * s)
}

/// Gaussian elimination with partial pivoting; None when |det| is negligible relative to ‖M‖^R.
fn solve_small(m: &mut [Complex64], mut rhs: Vec<Complex64>, r: usize) -> Option<Vec<Complex64>> {
    let norm = (0..r).map(|i| (0..r).map(|j| m[i * r + j].norm()).sum::<f64>()).fold(0.0, f64::max);
    let mut det_abs = 1.0;
    for k in 0..r {
        let p = (k..r).max_by(|&x, &y| m[x * r + k].norm().total_cmp(&m[y * r + k].norm()))?;
        if p != k {
            for j in 0..r {
                m.swap(k * r + j, p * r + j);
            }
            rhs.swap(k, p);
        }
        let piv = m[k * r + k];
        det_abs *= piv.norm();
        if piv.norm() == 0.0 {
            return None;
        }
        for i in k + 1..r {
            let f = m[i * r + k] / piv;
            for j in k..r {
                let v = m[k * r + j];
                m[i * r + j] -= f * v;
            }
            let v = rhs[k];
            rhs[i] -= f * v;
        }
    }
    if det_abs < SINGULAR_TOL * norm.powi(r as i32) {
        return None;
    }
    for k in (0..r).rev() {
        let mut s = rhs[k];
        for j in k + 1..r {
            s -= m[k * r + j] * rhs[j];
        }
        rhs[k] = s / m[k * r + k];
    }
    Some(rhs)
}

/// Shifts `principal` by a multiple of 2π so it lies within π of `prev`.
pub fn unwrap_near(prev: f64, principal: f64) -> f64 {
    principal + TWO_PI * ((prev - principal) / TWO_PI).round()
}

/// Unwrapped arg G_N along the straight path from 0 to σ (works for complex σ).
pub fn unwrapped_phase(tab: &ButcherTableau, sigma: Complex64) -> Result<f64> {
    let steps = ((sigma.norm() / 0.02).ceil() as usize).max(1);
    let mut phase = 0.0;
    for k in 1..=steps {
        let s = sigma * (k as f64 / steps as f64);
        phase = unwrap_near(phase, amplification_complex(tab, s)?.arg());
    }
    Ok(phase)
}

/// φ(σ) = σ − arg G_N(σ) with the continuous branch.
pub fn phase_error(tab: &ButcherTableau, sigma: f64) -> Result<f64> {
    Ok(sigma - unwrapped_phase(tab, Complex64::new(sigma, 0.0))?)
}

/// Sampled amplification data on a uniform grid over [0, π].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCurve {
    pub sigma: Vec<f64>,
    pub g: Vec<Complex64>,
    pub amplitude: Vec<f64>,
    pub phase: Vec<f64>,
    pub a_err: Vec<f64>,
    pub phi_err: Vec<f64>,
}

impl SpectralCurve {
    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("sigma,re_g,im_g,amplitude,phase,a_err,phi_err\n");
        for i in 0..self.len() {
            let _ = writeln!(
                s,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.sigma[i],
                self.g[i].re,
                self.g[i].im,
                self.amplitude[i],
                self.phase[i],
                self.a_err[i],
                self.phi_err[i]
            );
        }
        s
    }
}

pub fn sample_curve(tab: &ButcherTableau, n_samples: usize) -> Result<SpectralCurve> {
    if n_samples < 16 {
        return Err(Error::Dimension(format!("n_samples must be at least 16, got {n_samples}")));
    }
    let sigma: Vec<f64> = (0..n_samples).map(|i| PI * i as f64 / (n_samples - 1) as f64).collect();
    curve_on(tab, sigma)
}

/// Curve on an arbitrary ascending grid starting at or above 0.
pub fn curve_on(tab: &ButcherTableau, sigma: Vec<f64>) -> Result<SpectralCurve> {
    let n = sigma.len();
    let mut g = Vec::with_capacity(n);
    let mut phase = Vec::with_capacity(n);
    let mut prev = 0.0;
    for &s in &sigma {
        let gi = amplification(tab, s)?;
        prev = unwrap_near(prev, gi.arg());
        g.push(gi);
        phase.push(prev);
    }
    let amplitude: Vec<f64> = g.iter().map(|z| z.norm()).collect();
    let a_err = amplitude.iter().map(|a| 1.0 - a).collect();
    let phi_err = sigma.iter().zip(&phase).map(|(s, p)| s - p).collect();
    Ok(SpectralCurve { sigma, g, amplitude, phase, a_err, phi_err })
}

/// L²[0,π] norm of 1 − |G_N|.
pub fn dissipation_norm(tab: &ButcherTableau) -> Result<f64> {
    dissipation_norm_with(tab, CompositeRule::default())
}

pub fn dissipation_norm_with(tab: &ButcherTableau, rule: CompositeRule) -> Result<f64> {
    let v = rule.integrate(0.0, PI, |xs| {
        xs.iter().map(|&s| amplification(tab, s).map(|g| (1.0 - g.norm()).powi(2))).collect()
    })?;
    Ok(v.max(0.0).sqrt())
}

/// L²[0,π] norm of σ − arg G_N (continuous branch).
pub fn dispersion_norm(tab: &ButcherTableau) -> Result<f64> {
    dispersion_norm_with(tab, CompositeRule::default())
}

pub fn dispersion_norm_with(tab: &ButcherTableau, rule: CompositeRule) -> Result<f64> {
    let v = rule.integrate(0.0, PI, |xs| Ok(curve_on(tab, xs.to_vec())?.phi_err.iter().map(|p| p * p).collect()))?;
    Ok(v.max(0.0).sqrt())
}

/// Dissipative/dispersive order; `Infinite` when no nonzero series term is found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    Finite(usize),
    Infinite,
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Order::Finite(p) => write!(f, "{p}"),
            Order::Infinite => f.write_str("infinite"),
        }
    }
}

/// Taylor coefficients in σ of φ(σ) and a(σ), indices 0..terms.
///
/// Built from the moments m_k = bᵀA^{k−1}1 of G_N = 1 + Σ (Iσ)^k m_k and the
/// logarithm series of G_N.
pub fn error_series(tab: &ButcherTableau, terms: usize) -> (Vec<f64>, Vec<f64>) {
    let r = tab.stages();
    let mut g = vec![Complex64::new(0.0, 0.0); terms];
    g[0] = Complex64::new(1.0, 0.0);
    let mut v = vec![1.0; r];
    let mut ik = Complex64::new(1.0, 0.0);
    for gk in g.iter_mut().skip(1) {
        ik *= I;
        let m: f64 = tab.b().iter().zip(&v).map(|(b, x)| b * x).sum();
        *gk = ik * m;
        v = (0..r).map(|i| (0..r).map(|j| tab.a(i, j) * v[j]).sum()).collect();
    }
    // log G
    let mut l = vec![Complex64::new(0.0, 0.0); terms];
    for k in 1..terms {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 1..k {
            s += l[j] * g[k - j] * j as f64;
        }
        l[k] = g[k] - s / k as f64;
    }
    let mut phi = vec![0.0; terms];
    for k in 1..terms {
        phi[k] = -l[k].im;
    }
    if terms > 1 {
        phi[1] += 1.0;
    }
    // |G| = exp(Re log G)
    let re: Vec<f64> = l.iter().map(|z| z.re).collect();
    let mut e = vec![0.0; terms];
    e[0] = 1.0;
    for k in 1..terms {
        let mut s = 0.0;
        for j in 1..=k {
            s += j as f64 * re[j] * e[k - j];
        }
        e[k] = s / k as f64;
    }
    let a = e.iter().enumerate().map(|(k, x)| if k == 0 { 0.0 } else { -x }).collect();
    (phi, a)
}

fn leading_order(coeffs: &[f64]) -> Order {
    match coeffs.iter().skip(1).position(|c| c.abs() > ORDER_COEFF_TOL) {
        Some(i) => Order::Finite(i),
        None => Order::Infinite,
    }
}

/// q such that φ(σ) = O(σ^{q+1}).
pub fn dispersive_order(tab: &ButcherTableau) -> Order {
    leading_order(&error_series(tab, SERIES_TERMS).0)
}

/// p such that a(σ) = O(σ^{p+1}).
pub fn dissipative_order(tab: &ButcherTableau) -> Order {
    leading_order(&error_series(tab, SERIES_TERMS).1)
}

/// Least-squares slope of log|f| against log σ on `n` log-spaced samples in [lo, hi].
pub fn fit_log_slope(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            let s = (lo.ln() + t * (hi.ln() - lo.ln())).exp();
            (s.ln(), f(s).abs().ln())
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn amplification_dd(tab: &ButcherTableau, sigma: f64) -> CDd {
    let r = tab.stages();
    let zero = CDd::default();
    let one = CDd::new(Dd::ONE, Dd::ZERO);
    let mut m = vec![zero; r * r];
    for i in 0..r {
        for j in 0..r {
            // −Iσ a_ij
            m[i * r + j] = CDd::new(Dd::ZERO, -(Dd::new(sigma) * Dd::new(tab.a(i, j))));
        }
        m[i * r + i] = m[i * r + i] + one;
    }
    let mut x = vec![one; r];
    for k in 0..r {
        for i in k + 1..r {
            let f = m[i * r + k] / m[k * r + k];
            for j in k..r {
                m[i * r + j] = m[i * r + j] - f * m[k * r + j];
            }
            x[i] = x[i] - f * x[k];
        }
    }
    for k in (0..r).rev() {
        let mut s = x[k];
        for j in k + 1..r {
            s = s - m[k * r + j] * x[j];
        }
        x[k] = s / m[k * r + k];
    }
    let mut s = zero;
    for (b, xi) in tab.b().iter().zip(&x) {
        s = s + CDd::new(Dd::new(*b), Dd::ZERO) * *xi;
    }
    one + CDd::new(Dd::ZERO, Dd::new(sigma)) * s
}

/// |G_N(σ) − e^{Iσ}| evaluated in double-double arithmetic (small σ only).
pub fn local_error_dd(tab: &ButcherTableau, sigma: f64) -> f64 {
    let g = amplification_dd(tab, sigma);
    let (s, c) = Dd::new(sigma).sin_cos();
    let d = g - CDd::new(c, s);
    d.norm_sqr().to_f64().sqrt()
}

/// φ(σ) in double-double arithmetic (small σ, where the principal branch is the continuous one).
pub fn phase_error_dd(tab: &ButcherTableau, sigma: f64) -> f64 {
    (Dd::new(sigma) - amplification_dd(tab, sigma).arg()).to_f64()
}

/// Closed-form continuous arg G for the zero-dissipation two-stage family.
pub fn arg_two_stage(y: f64, sigma: f64) -> f64 {
    2.0 * (0.5 * sigma).atan2(1.0 + sigma * sigma * y)
}

/// Closed-form continuous arg G for the zero-dissipation three-stage family.
pub fn arg_three_stage(x: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let num = 2.0 * (s2 * x - 1.0);
    let den = sigma * (1.0 - s2 * (x - 1.0 / 12.0));
    2.0 * num.atan2(den) + PI
}

/// σ − arg_two_stage(Y, σ) without cancellation.
pub fn phi_two_stage_dd(y: f64, sigma: f64) -> f64 {
    let s = Dd::new(sigma);
    let den = Dd::ONE + s * s * Dd::new(y);
    (s - Dd::new(2.0) * Dd::atan2(s * Dd::new(0.5), den)).to_f64()
}

/// σ − arg_three_stage(X, σ) without cancellation.
pub fn phi_three_stage_dd(x: f64, sigma: f64) -> f64 {
    let s = Dd::new(sigma);
    let s2 = s * s;
    let x = Dd::new(x);
    let num = Dd::new(2.0) * (s2 * x - Dd::ONE);
    let twelfth = Dd::ONE / Dd::new(12.0);
    let den = s * (Dd::ONE - s2 * (x - twelfth));
    (s - Dd::new(2.0) * Dd::atan2(num, den) - Dd::PI).to_f64()
}

/// Largest |1 − |G_N|| over `n` uniform samples of [0, π].
pub fn max_dissipation(tab: &ButcherTableau, n: usize) -> Result<f64> {
    let c = sample_curve(tab, n)?;
    Ok(c.a_err.iter().fold(0.0, |m, a| m.max(a.abs())))
}

/// Smallest σ in (0, π) where |φ_A| = |φ_B|; `None` when the difference keeps one sign.
pub fn crossover(a: &ButcherTableau, b: &ButcherTableau) -> Result<Option<f64>> {
    const N: usize = 4097;
    const NOISE: f64 = 1e-12;
    for t in [a, b] {
        let m = max_dissipation(t, 1024)?;
        if m > 1e-8 {
            return Err(Error::Unsupported(format!(
                "crossover needs minimally dissipative schemes; {} has max|1-|G|| = {m:e}",
                t.name()
            )));
        }
    }
    let ca = sample_curve(a, N)?;
    let cb = sample_curve(b, N)?;
    let diff = |i: usize| ca.phi_err[i].abs() - cb.phi_err[i].abs();
    let significant = |i: usize| ca.phi_err[i].abs().max(cb.phi_err[i].abs()) > NOISE;
    let mut prev: Option<usize> = None;
    for i in 1..N - 1 {
        if !significant(i) {
            continue;
        }
        if let Some(p) = prev {
            if diff(p).signum() != diff(i).signum() {
                return bisect_crossover(a, b, (&ca, &cb), p, i).map(Some);
            }
        }
        prev = Some(i);
    }
    Ok(None)
}

fn bisect_crossover(
    a: &ButcherTableau,
    b: &ButcherTableau,
    curves: (&SpectralCurve, &SpectralCurve),
    lo_idx: usize,
    hi_idx: usize,
) -> Result<f64> {
    let (ca, cb) = curves;
    let phi_at = |t: &ButcherTableau, c: &SpectralCurve, s: f64| -> Result<f64> {
        let ph = unwrap_near(c.phase[lo_idx], amplification(t, s)?.arg());
        Ok(s - ph)
    };
    let d = |s: f64| -> Result<f64> { Ok(phi_at(a, ca, s)?.abs() - phi_at(b, cb, s)?.abs()) };
    let (mut lo, mut hi) = (ca.sigma[lo_idx], ca.sigma[hi_idx]);
    let d_lo = d(lo)?;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let dm = d(mid)?;
        if dm.signum() == d_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
