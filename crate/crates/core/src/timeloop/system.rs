use std::borrow::Cow;

use crate::linalg::{norm_inf, Csr, LinearOp};

/// dN/du at some state: either assembled or available only as a product.
pub enum Jacobian<'a> {
    Sparse(Cow<'a, Csr>),
    Operator(&'a dyn LinearOp),
}

impl Jacobian<'_> {
    pub fn as_op(&self) -> &dyn LinearOp {
        match self {
            Jacobian::Sparse(c) => c.as_ref(),
            Jacobian::Operator(o) => *o,
        }
    }
}

/// Semi-discrete system M u' = N(t, u).
pub trait System: Sync {
    fn dim(&self) -> usize;

    /// Mass matrix; identity when `None`.
    fn mass(&self) -> Option<&Csr> {
        None
    }

    fn rhs(&self, t: f64, u: &[f64], out: &mut [f64]);

    fn jacobian(&self, t: f64, u: &[f64]) -> Jacobian<'_>;

    /// N(t, u) = K u + f(t) with constant K.
    fn is_linear(&self) -> bool;
}

type Forcing = Box<dyn Fn(f64, &mut [f64]) + Send + Sync>;

/// M u' = K u + f(t), with K assembled or matrix-free.
pub struct LinearOde {
    pub mass: Option<Csr>,
    stiffness: Stiffness,
    forcing: Option<Forcing>,
}

enum Stiffness {
    Sparse(Csr),
    Operator(Box<dyn LinearOp>),
}

impl LinearOde {
    pub fn new(stiffness: Csr) -> Self {
        Self { mass: None, stiffness: Stiffness::Sparse(stiffness), forcing: None }
    }

    pub fn matrix_free(op: Box<dyn LinearOp>) -> Self {
        Self { mass: None, stiffness: Stiffness::Operator(op), forcing: None }
    }

    pub fn with_mass(mut self, mass: Csr) -> Self {
        self.mass = Some(mass);
        self
    }

    /// Adds f(t); the closure writes f(t) into its slice.
    pub fn with_forcing(mut self, f: impl Fn(f64, &mut [f64]) + Send + Sync + 'static) -> Self {
        self.forcing = Some(Box::new(f));
        self
    }

    fn op(&self) -> &dyn LinearOp {
        match &self.stiffness {
            Stiffness::Sparse(c) => c,
            Stiffness::Operator(o) => o.as_ref(),
        }
    }
}

impl System for LinearOde {
    fn dim(&self) -> usize {
        self.op().dim()
    }

    fn mass(&self) -> Option<&Csr> {
        self.mass.as_ref()
    }

    fn rhs(&self, t: f64, u: &[f64], out: &mut [f64]) {
        self.op().apply(u, out);
        if let Some(f) = &self.forcing {
            let mut extra = vec![0.0; out.len()];
            f(t, &mut extra);
            out.iter_mut().zip(extra).for_each(|(o, e)| *o += e);
        }
    }

    fn jacobian(&self, _t: f64, _u: &[f64]) -> Jacobian<'_> {
        match &self.stiffness {
            Stiffness::Sparse(c) => Jacobian::Sparse(Cow::Borrowed(c)),
            Stiffness::Operator(o) => Jacobian::Operator(o.as_ref()),
        }
    }

    fn is_linear(&self) -> bool {
        true
    }
}

/// Largest |N(t, u+v) − N(t, u) − N(t, v) + N(t, 0)| relative to the sizes involved;
/// zero (to rounding) for affine systems.
pub fn check_linearity(sys: &dyn System, t: f64, u: &[f64], v: &[f64]) -> f64 {
    let n = sys.dim();
    let eval = |x: &[f64]| {
        let mut o = vec![0.0; n];
        sys.rhs(t, x, &mut o);
        o
    };
    let uv: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
    let (a, b, c, d) = (eval(&uv), eval(u), eval(v), eval(&vec![0.0; n]));
    let diff: Vec<f64> = (0..n).map(|i| a[i] - b[i] - c[i] + d[i]).collect();
    let scale = norm_inf(&a).max(norm_inf(&b)).max(norm_inf(&c)).max(1.0);
    norm_inf(&diff) / scale
}
