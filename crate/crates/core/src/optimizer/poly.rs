//! Sparse multivariate polynomials with real coefficients, used for the coefficient equations.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u8>, f64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        if c != 0.0 {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(e, 1.0);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            *out.terms.entry(e.clone()).or_insert(0.0) += c;
        }
        out.prune();
        out
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|c| *c *= s);
        out.prune();
        out
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(-1.0))
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u8> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *out.terms.entry(e).or_insert(0.0) += c1 * c2;
            }
        }
        out.prune();
        out
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| *c != 0.0);
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(e, c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>()).sum()
    }

    /// Gradient at x.
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.nvars];
        for (e, c) in &self.terms {
            for (i, gi) in g.iter_mut().enumerate() {
                if e[i] == 0 {
                    continue;
                }
                let mut t = c * e[i] as f64;
                for (j, (&k, &xj)) in e.iter().zip(x).enumerate() {
                    let k = if j == i { k - 1 } else { k };
                    t *= xj.powi(k as i32);
                }
                *gi += t;
            }
        }
        g
    }
}
