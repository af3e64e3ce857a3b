//! Double-double arithmetic (~32 significant digits) for evaluating phase errors
//! far below the double-precision noise floor at small σ.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd { hi: std::f64::consts::PI, lo: 1.224_646_799_147_353_2e-16 };

    pub const fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn recip(self) -> Self {
        Dd::ONE / self
    }

    /// Sine and cosine by Taylor series; intended for |x| ≲ 4.
    pub fn sin_cos(self) -> (Dd, Dd) {
        // halve until small, then use double-angle formulas
        let mut k = 0;
        let mut y = self;
        while y.hi.abs() > 0.125 {
            y = y * Dd::new(0.5);
            k += 1;
        }
        let y2 = y * y;
        let mut term = y;
        let mut s = y;
        let mut n = 1.0;
        loop {
            term = -(term * y2) / Dd::new((n + 1.0) * (n + 2.0));
            n += 2.0;
            s = s + term;
            if term.hi.abs() <= 1e-34 * s.hi.abs() {
                break;
            }
        }
        // cos = sqrt(1 - s^2) would lose accuracy; use the series
        let mut term = Dd::ONE;
        let mut c = Dd::ONE;
        let mut n = 0.0;
        loop {
            term = -(term * y2) / Dd::new((n + 1.0) * (n + 2.0));
            n += 2.0;
            c = c + term;
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        for _ in 0..k {
            let s2 = Dd::new(2.0) * s * c;
            let c2 = c * c - s * s;
            s = s2;
            c = c2;
        }
        (s, c)
    }

    /// Four-quadrant arctangent via one Newton correction of the double result.
    pub fn atan2(y: Dd, x: Dd) -> Dd {
        let t0 = Dd::new(y.to_f64().atan2(x.to_f64()));
        let (s, c) = t0.sin_cos();
        // solve y cos t - x sin t = 0 for t near t0
        let num = y * c - x * s;
        let den = x * c + y * s;
        t0 + num / den
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::new(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// Complex number with double-double parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CDd {
    pub re: Dd,
    pub im: Dd,
}

impl CDd {
    pub fn new(re: Dd, im: Dd) -> Self {
        Self { re, im }
    }

    pub fn norm_sqr(self) -> Dd {
        self.re * self.re + self.im * self.im
    }

    pub fn arg(self) -> Dd {
        Dd::atan2(self.im, self.re)
    }
}

impl Add for CDd {
    type Output = CDd;
    fn add(self, o: CDd) -> CDd {
        CDd::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for CDd {
    type Output = CDd;
    fn sub(self, o: CDd) -> CDd {
        CDd::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for CDd {
    type Output = CDd;
    fn mul(self, o: CDd) -> CDd {
        CDd::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Div for CDd {
    type Output = CDd;
    fn div(self, o: CDd) -> CDd {
        let d = o.norm_sqr();
        CDd::new((self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d)
    }
}
