//! Interior stencil coefficients, loaded from `data/stencils.json`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::error::{Error, Result};

use super::StencilKind;

/// Environment variable naming a directory that replaces the built-in coefficient data.
pub const DATA_ENV: &str = "IRKWAVELAB_DATA";

const BUILTIN: &str = include_str!("../../data/stencils.json");

/// Central interior stencil:
/// f'_i + Σ_j lhs_j (f'_{i−j} + f'_{i+j}) = (1/h) Σ_j rhs_j (f_{i+j} − f_{i−j}).
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub provenance: String,
}

impl Stencil {
    pub fn half_width(&self) -> usize {
        self.rhs.len().max(self.lhs.len())
    }

    pub fn is_explicit(&self) -> bool {
        self.lhs.iter().all(|v| *v == 0.0)
    }

    /// Modified wavenumber k_eq·h of the interior stencil at kh.
    pub fn symbol(&self, kh: f64) -> f64 {
        let num: f64 = self.rhs.iter().enumerate().map(|(j, c)| 2.0 * c * ((j + 1) as f64 * kh).sin()).sum();
        let den: f64 =
            1.0 + self.lhs.iter().enumerate().map(|(j, a)| 2.0 * a * ((j + 1) as f64 * kh).cos()).sum::<f64>();
        num / den
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Coef {
    Num(f64),
    Text(String),
}

impl Coef {
    fn value(&self) -> Result<f64> {
        match self {
            Coef::Num(v) => Ok(*v),
            Coef::Text(s) => parse_rational(s),
        }
    }
}

fn parse_rational(s: &str) -> Result<f64> {
    let bad = || Error::Data(format!("bad coefficient `{s}`"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(bad());
            }
            Ok(p / q)
        }
        None => s.trim().parse().map_err(|_| bad()),
    }
}

#[derive(Deserialize)]
struct RawStencil {
    provenance: String,
    lhs: Vec<Coef>,
    rhs: Vec<Coef>,
}

#[derive(Deserialize)]
struct RawFile {
    stencils: BTreeMap<String, RawStencil>,
}

/// Parses a coefficient file.
pub fn parse_stencils(text: &str) -> Result<BTreeMap<StencilKind, Stencil>> {
    let raw: RawFile = serde_json::from_str(text)?;
    let mut out = BTreeMap::new();
    for (name, r) in raw.stencils {
        let kind: StencilKind = name.parse()?;
        let lhs = r.lhs.iter().map(Coef::value).collect::<Result<Vec<_>>>()?;
        let rhs = r.rhs.iter().map(Coef::value).collect::<Result<Vec<_>>>()?;
        if rhs.is_empty() {
            return Err(Error::Data(format!("{name}: empty right-hand side")));
        }
        out.insert(kind, Stencil { lhs, rhs, provenance: r.provenance });
    }
    Ok(out)
}

fn load() -> Result<BTreeMap<StencilKind, Stencil>> {
    match std::env::var_os(DATA_ENV) {
        Some(dir) => {
            let path = PathBuf::from(dir).join("stencils.json");
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
            parse_stencils(&text)
        }
        None => parse_stencils(BUILTIN),
    }
}

/// Coefficient table, read once per process.
pub fn stencil(kind: StencilKind) -> Result<&'static Stencil> {
    static TABLE: OnceLock<std::result::Result<BTreeMap<StencilKind, Stencil>, String>> = OnceLock::new();
    let table = TABLE.get_or_init(|| load().map_err(|e| e.to_string())).as_ref().map_err(|e| Error::Data(e.clone()))?;
    table.get(&kind).ok_or_else(|| Error::Data(format!("no coefficients for {kind}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_file_parses_all_kinds() {
        let t = parse_stencils(BUILTIN).unwrap();
        assert_eq!(t.len(), 4);
        assert!((t[&StencilKind::Lele6].rhs[0] - 7.0 / 9.0).abs() < 1e-16);
    }

    #[test]
    fn rationals_and_errors() {
        assert_eq!(parse_rational("-3/20").unwrap(), -0.15);
        assert_eq!(parse_rational("0.5").unwrap(), 0.5);
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn unknown_kind_is_a_data_error() {
        let text = r#"{"stencils": {"Nope": {"provenance": "", "lhs": [], "rhs": [1]}}}"#;
        assert!(parse_stencils(text).is_err());
    }
}
