//! Weighted phase-error minimization over the reduced family parameter and
//! derivation of concrete tableaux from closure equations.

mod constraints;
mod minimize;
mod poly;
mod solve;

pub use constraints::{unknown_index, unknown_name, unknowns_of, Constraint, ConstraintSet, LinearConstraint};
pub use minimize::{minimize_bracketed, Minimum};
pub use poly::Poly;
pub use solve::{
    describe, order_condition, solve_three_stage, solve_two_stage, three_stage_base, two_stage_base, Solution, System,
    THREE_STAGE_TOL, TWO_STAGE_TOL,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::butcher::{order_of_accuracy, scheme_info, ButcherTableau};
use crate::error::{Error, Result};
use crate::quadrature::CompositeRule;
use crate::spectral::{self, arg_three_stage, arg_two_stage, Order};

/// Reduced family: two stages parameterized by Y, three stages by X.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    TwoStage,
    ThreeStage,
}

impl Family {
    pub fn stages(self) -> usize {
        match self {
            Family::TwoStage => 2,
            Family::ThreeStage => 3,
        }
    }

    pub fn from_stages(r: usize) -> Option<Self> {
        match r {
            2 => Some(Family::TwoStage),
            3 => Some(Family::ThreeStage),
            _ => None,
        }
    }

    /// Default search bracket for the family parameter.
    pub fn bracket(self) -> (f64, f64) {
        match self {
            Family::TwoStage => (-0.2, 0.0),
            Family::ThreeStage => (0.0, 0.2),
        }
    }

    /// Parameter value at which the leading phase-error term vanishes.
    pub fn asymptote(self) -> f64 {
        match self {
            Family::TwoStage => -1.0 / 12.0,
            Family::ThreeStage => 0.1,
        }
    }

    pub fn arg(self, param: f64, sigma: f64) -> f64 {
        match self {
            Family::TwoStage => arg_two_stage(param, sigma),
            Family::ThreeStage => arg_three_stage(param, sigma),
        }
    }

    /// Leading coefficient of the small-σ expansion of φ for the reduced family.
    pub fn leading_coefficient(self, param: f64) -> f64 {
        match self {
            Family::TwoStage => param + 1.0 / 12.0,
            Family::ThreeStage => (1.0 - 10.0 * param) / 120.0,
        }
    }
}

/// Weight exponent α of the kernel exp(−ασ²); `Asymptotic` is the α → ∞ limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Alpha {
    Finite(f64),
    Asymptotic,
}

impl std::str::FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Alpha::Asymptotic);
        }
        let v: f64 = t.parse().map_err(|_| Error::Parse { line: 0, msg: format!("bad alpha `{s}`") })?;
        if v.is_nan() || v < 0.0 {
            return Err(Error::Parse { line: 0, msg: format!("alpha must be non-negative, got {v}") });
        }
        Ok(if v.is_infinite() { Alpha::Asymptotic } else { Alpha::Finite(v) })
    }
}

impl std::fmt::Display for Alpha {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Alpha::Finite(a) => write!(f, "{a}"),
            Alpha::Asymptotic => f.write_str("inf"),
        }
    }
}

/// L²[0,π] phase error of the reduced family weighted by exp(−ασ²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedObjective {
    pub family: Family,
    pub alpha: Alpha,
    pub rule: CompositeRule,
    pub bracket: (f64, f64),
}

impl WeightedObjective {
    pub fn new(family: Family, alpha: Alpha) -> Self {
        Self { family, alpha, rule: CompositeRule::default(), bracket: family.bracket() }
    }

    pub fn with_rule(mut self, rule: CompositeRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn weighted_phase_norm(&self, param: f64) -> Result<f64> {
        let Alpha::Finite(alpha) = self.alpha else {
            return Err(Error::Unsupported("the asymptotic objective has no finite-α integrand".into()));
        };
        let fam = self.family;
        let v = self.rule.integrate(0.0, PI, |xs| {
            Ok(xs
                .iter()
                .map(|&s| {
                    let e = (s - fam.arg(param, s)) * (-alpha * s * s).exp();
                    e * e
                })
                .collect())
        })?;
        Ok(v.max(0.0).sqrt())
    }

    /// Parameter minimizing the weighted phase norm inside the bracket.
    pub fn minimize_param(&self) -> Result<f64> {
        if self.alpha == Alpha::Asymptotic {
            return Ok(self.family.asymptote());
        }
        let (lo, hi) = self.bracket;
        let m = minimize_bracketed(|p| self.weighted_phase_norm(p), lo, hi, 1e-12)?;
        let edge = 1e-9 * (hi - lo);
        if m.x - lo <= edge || hi - m.x <= edge {
            return Err(Error::Bracket { lo, hi });
        }
        Ok(m.x)
    }
}

/// Minimizer for each α; failures are reported per point without stopping the sweep.
pub fn alpha_sweep(family: Family, alphas: &[f64]) -> Vec<(f64, Result<f64>)> {
    use rayon::prelude::*;
    alphas.par_iter().map(|&a| (a, WeightedObjective::new(family, Alpha::Finite(a)).minimize_param())).collect()
}

/// Summary of a scheme's accuracy and spectral properties.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub name: String,
    pub stages: usize,
    pub order: usize,
    pub dissipative_order: Order,
    pub dispersive_order: Order,
    pub phi_norm: f64,
    pub a_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
}

pub fn verify_scheme(tab: &ButcherTableau) -> Result<VerifyReport> {
    Ok(VerifyReport {
        name: tab.name().to_string(),
        stages: tab.stages(),
        order: order_of_accuracy(tab, 1e-9),
        dissipative_order: spectral::dissipative_order(tab),
        dispersive_order: spectral::dispersive_order(tab),
        phi_norm: spectral::dispersion_norm(tab)?,
        a_norm: spectral::dissipation_norm(tab)?,
        y: tab.y_param(),
        x: tab.x_param(),
    })
}

/// Output of the full derivation pipeline: minimize, then solve.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub family: Family,
    pub alpha: Alpha,
    pub param: f64,
    pub solution: Solution,
}

pub fn derive(
    family: Family,
    alpha: Alpha,
    closures: &ConstraintSet,
    reference: Option<&ButcherTableau>,
) -> Result<Derivation> {
    let param = WeightedObjective::new(family, alpha).minimize_param()?;
    let solution = match family {
        Family::TwoStage => solve_two_stage(param, closures, reference)?,
        Family::ThreeStage => solve_three_stage(param, closures, reference)?,
    };
    Ok(Derivation { family, alpha, param, solution })
}

/// Re-derives a registry scheme from its published α and closures.
pub fn rederive(name: &str) -> Result<Derivation> {
    let info = scheme_info(name)?;
    let (Some(alpha), Some(text)) = (info.alpha, info.closures) else {
        return Err(Error::Unsupported(format!("{name} is not an optimized-family scheme")));
    };
    let family = Family::from_stages(info.tableau.stages())
        .ok_or_else(|| Error::Unsupported(format!("{name} has no reduced family")))?;
    let set = ConstraintSet::parse(family.stages(), text)?;
    derive(family, alpha, &set, Some(&info.tableau))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_parsing() {
        assert_eq!("inf".parse::<Alpha>().unwrap(), Alpha::Asymptotic);
        assert_eq!("4".parse::<Alpha>().unwrap(), Alpha::Finite(4.0));
        assert!("-1".parse::<Alpha>().is_err());
        assert!("x".parse::<Alpha>().is_err());
    }

    #[test]
    fn asymptotic_minimizers_are_exact() {
        assert_eq!(WeightedObjective::new(Family::TwoStage, Alpha::Asymptotic).minimize_param().unwrap(), -1.0 / 12.0);
        assert_eq!(WeightedObjective::new(Family::ThreeStage, Alpha::Asymptotic).minimize_param().unwrap(), 0.1);
    }

    #[test]
    fn bracket_without_interior_minimum_is_an_error() {
        let mut obj = WeightedObjective::new(Family::TwoStage, Alpha::Finite(0.0));
        obj.bracket = (-0.05, 0.0);
        assert!(matches!(obj.minimize_param(), Err(Error::Bracket { .. })));
    }

    #[test]
    fn leading_coefficients_vanish_at_asymptotes() {
        for f in [Family::TwoStage, Family::ThreeStage] {
            assert!(f.leading_coefficient(f.asymptote()).abs() < 1e-17);
        }
    }
}
