//! Butcher tableaux, rooted-tree order conditions and the built-in scheme registry.

mod registry;
mod trees;

pub use registry::{builtin_scheme, registry, scheme_info, scheme_names, SchemeInfo};
pub use trees::{elementary_weight, enumerate_trees, order_of_accuracy, tree_density, RootedTree};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients (A, b, c) of an R-stage Runge-Kutta method.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    name: String,
    stages: usize,
    /// row-major R×R
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl ButcherTableau {
    /// Builds a tableau from rows of A and weights b; the abscissae are the row sums of A.
    pub fn new(name: impl Into<String>, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let stages = b.len();
        if stages == 0 {
            return Err(Error::InvalidTableau("at least one stage is required".into()));
        }
        if a.len() != stages || a.iter().any(|row| row.len() != stages) {
            return Err(Error::InvalidTableau(format!("A must be {stages}x{stages} to match b")));
        }
        let c = a.iter().map(|row| row.iter().sum()).collect();
        let a = a.into_iter().flatten().collect();
        let tab = Self { name: name.into(), stages, a, b, c };
        tab.check_finite()?;
        Ok(tab)
    }

    /// Builds a tableau with explicit abscissae, checking c_r = Σ_s a_rs.
    pub fn with_abscissae(name: impl Into<String>, a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let mut tab = Self::new(name, a, b)?;
        if c.len() != tab.stages {
            return Err(Error::InvalidTableau(format!(
                "c has length {} but the tableau has {} stages",
                c.len(),
                tab.stages
            )));
        }
        for r in 0..tab.stages {
            let row_abs: f64 = (0..tab.stages).map(|s| tab.a(r, s).abs()).sum();
            if (c[r] - tab.c[r]).abs() > 1e-12 * (1.0 + row_abs) {
                return Err(Error::InvalidTableau(format!(
                    "c[{r}] = {} differs from the row sum {} of A",
                    c[r], tab.c[r]
                )));
            }
        }
        tab.c = c;
        Ok(tab)
    }

    fn check_finite(&self) -> Result<()> {
        if self.a.iter().chain(&self.b).chain(&self.c).all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidTableau("non-finite coefficient".into()))
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    #[inline]
    pub fn a(&self, r: usize, s: usize) -> f64 {
        self.a[r * self.stages + s]
    }

    pub fn a_rows(&self) -> Vec<Vec<f64>> {
        self.a.chunks(self.stages).map(|r| r.to_vec()).collect()
    }

    /// Row-major copy of A.
    pub fn a_flat(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn trace(&self) -> f64 {
        (0..self.stages).map(|r| self.a(r, r)).sum()
    }

    /// Two-stage family parameter a12·a21 − a11·a22.
    pub fn y_param(&self) -> Option<f64> {
        (self.stages == 2).then(|| self.a(0, 1) * self.a(1, 0) - self.a(0, 0) * self.a(1, 1))
    }

    /// Three-stage family parameter: sum of the 2×2 principal minors of A.
    pub fn x_param(&self) -> Option<f64> {
        if self.stages != 3 {
            return None;
        }
        let minor = |i: usize, j: usize| self.a(i, i) * self.a(j, j) - self.a(i, j) * self.a(j, i);
        Some(minor(0, 1) + minor(1, 2) + minor(0, 2))
    }

    /// Largest deviation of c from the row sums of A.
    pub fn row_sum_defect(&self) -> f64 {
        (0..self.stages)
            .map(|r| {
                let s: f64 = (0..self.stages).map(|s| self.a(r, s)).sum();
                (s - self.c[r]).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&TableauFile::from(self)).expect("tableau serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TableauFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TableauFile {
    name: String,
    #[serde(rename = "R")]
    stages: usize,
    #[serde(rename = "A")]
    a: MatrixField,
    b: Vec<f64>,
    #[serde(default)]
    c: Option<Vec<f64>>,
}

/// A is written row-major flat; nested rows are accepted on input.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixField {
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

impl From<&ButcherTableau> for TableauFile {
    fn from(t: &ButcherTableau) -> Self {
        Self {
            name: t.name.clone(),
            stages: t.stages,
            a: MatrixField::Flat(t.a.clone()),
            b: t.b.clone(),
            c: Some(t.c.clone()),
        }
    }
}

impl TryFrom<TableauFile> for ButcherTableau {
    type Error = Error;

    fn try_from(f: TableauFile) -> Result<Self> {
        let r = f.stages;
        if r == 0 {
            return Err(Error::InvalidTableau("R must be positive".into()));
        }
        let rows = match f.a {
            MatrixField::Rows(rows) => rows,
            MatrixField::Flat(flat) => {
                if flat.len() != r * r {
                    return Err(Error::InvalidTableau(format!("A has {} entries, expected {}", flat.len(), r * r)));
                }
                flat.chunks(r).map(|c| c.to_vec()).collect()
            }
        };
        if f.b.len() != r {
            return Err(Error::InvalidTableau(format!("b has length {}, expected {r}", f.b.len())));
        }
        match f.c {
            Some(c) => Self::with_abscissae(f.name, rows, f.b, c),
            None => Self::new(f.name, rows, f.b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abscissae_are_row_sums() {
        let t = ButcherTableau::new("t", vec![vec![0.25, 0.1], vec![0.3, 0.25]], vec![0.5, 0.5]).unwrap();
        assert_eq!(t.c(), &[0.35, 0.55]);
        assert!(t.row_sum_defect() < 1e-15);
    }

    #[test]
    fn rejects_inconsistent_abscissae() {
        let err = ButcherTableau::with_abscissae("t", vec![vec![1.0]], vec![1.0], vec![0.5]);
        assert!(matches!(err, Err(Error::InvalidTableau(_))));
    }

    #[test]
    fn rejects_shape_mismatch() {
        assert!(ButcherTableau::new("t", vec![vec![1.0, 0.0]], vec![1.0]).is_err());
        assert!(ButcherTableau::new("t", vec![], vec![]).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let t = ButcherTableau::new(
            "odd",
            vec![vec![0.1 + 0.2, -1.0 / 3.0], vec![std::f64::consts::PI, 1e-300]],
            vec![0.7, 0.3],
        )
        .unwrap();
        let back = ButcherTableau::from_json(&t.to_json()).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn json_accepts_nested_rows_without_c() {
        let t = ButcherTableau::from_json(r#"{"name":"BE","R":1,"A":[[1.0]],"b":[1.0]}"#).unwrap();
        assert_eq!(t.c(), &[1.0]);
    }

    #[test]
    fn family_parameters() {
        let t = ButcherTableau::new("t", vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![0.5, 0.5]).unwrap();
        assert_eq!(t.y_param(), Some(2.0));
        assert_eq!(t.x_param(), None);
        let t3 = ButcherTableau::new(
            "t3",
            vec![vec![1.0, 2.0, 0.0], vec![0.0, 3.0, 1.0], vec![1.0, 0.0, 2.0]],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        // (1*3 - 0) + (3*2 - 0) + (1*2 - 0)
        assert_eq!(t3.x_param(), Some(11.0));
    }
}
