//! Closure equations in a small text form, e.g. `b1 = b2`, `a12 = 2*a22`, `order >= 3`.

use crate::butcher::{elementary_weight, enumerate_trees, tree_density, ButcherTableau};
use crate::error::{Error, Result};

/// Linear equation Σ coeffs[i]·x_i + constant = 0 over the tableau unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub constant: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    Linear(LinearConstraint),
    /// All order conditions up to the given order.
    OrderAtLeast(usize),
}

/// Parsed closures for an R-stage family. Unknowns are ordered b_1..b_R, a_11..a_RR.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    stages: usize,
    items: Vec<Constraint>,
}

/// Index of `b<r>` or `a<r><s>` in the unknown vector.
pub fn unknown_index(stages: usize, name: &str) -> Option<usize> {
    let digits: Vec<usize> = name[1..].chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect::<Option<_>>()?;
    let in_range = |d: usize| (1..=stages).contains(&d);
    match (name.as_bytes().first()?, digits.as_slice()) {
        (b'b', [r]) if in_range(*r) => Some(r - 1),
        (b'a', [r, s]) if in_range(*r) && in_range(*s) => Some(stages + (r - 1) * stages + (s - 1)),
        _ => None,
    }
}

pub fn unknown_name(stages: usize, idx: usize) -> String {
    if idx < stages {
        format!("b{}", idx + 1)
    } else {
        let k = idx - stages;
        format!("a{}{}", k / stages + 1, k % stages + 1)
    }
}

/// Flattens a tableau into the unknown vector.
pub fn unknowns_of(tab: &ButcherTableau) -> Vec<f64> {
    tab.b().iter().chain(tab.a_flat()).copied().collect()
}

impl ConstraintSet {
    pub fn new(stages: usize, items: Vec<Constraint>) -> Self {
        Self { stages, items }
    }

    pub fn parse(stages: usize, text: &str) -> Result<Self> {
        let mut items = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: lineno + 1, msg };
            if let Some(rest) = line.strip_prefix("order") {
                let p = rest
                    .trim()
                    .strip_prefix(">=")
                    .and_then(|v| v.trim().parse::<usize>().ok())
                    .ok_or_else(|| err(format!("expected `order >= <integer>`, got `{line}`")))?;
                if !(1..=8).contains(&p) {
                    return Err(err(format!("order bound {p} outside 1..=8")));
                }
                items.push(Constraint::OrderAtLeast(p));
                continue;
            }
            let sides: Vec<&str> = line.split('=').collect();
            if sides.len() < 2 {
                return Err(err(format!("expected an equation, got `{line}`")));
            }
            let forms = sides.iter().map(|s| parse_linear(stages, s).map_err(&err)).collect::<Result<Vec<_>>>()?;
            for pair in forms.windows(2) {
                let (l, r) = (&pair[0], &pair[1]);
                let coeffs: Vec<f64> = l.0.iter().zip(&r.0).map(|(x, y)| x - y).collect();
                if coeffs.iter().all(|c| *c == 0.0) {
                    return Err(err(format!("`{line}` does not involve any coefficient")));
                }
                items.push(Constraint::Linear(LinearConstraint {
                    coeffs,
                    constant: l.1 - r.1,
                    text: line.to_string(),
                }));
            }
        }
        Ok(Self { stages, items })
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn items(&self) -> &[Constraint] {
        &self.items
    }

    /// Number of scalar equations contributed by `order >= p` for this stage count,
    /// counting only conditions beyond those already present in the base system.
    pub fn equation_count(&self, base_order: usize) -> usize {
        let trees = enumerate_trees(8).expect("valid order");
        self.items
            .iter()
            .map(|c| match c {
                Constraint::Linear(_) => 1,
                Constraint::OrderAtLeast(p) => (base_order + 1..=*p).map(|k| trees[k - 1].len()).sum(),
            })
            .sum()
    }

    pub fn max_order(&self) -> usize {
        self.items
            .iter()
            .filter_map(|c| match c {
                Constraint::OrderAtLeast(p) => Some(*p),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Residual of every closure equation on a tableau.
    pub fn residuals(&self, tab: &ButcherTableau) -> Vec<f64> {
        let x = unknowns_of(tab);
        let mut out = Vec::new();
        for c in &self.items {
            match c {
                Constraint::Linear(l) => {
                    out.push(l.coeffs.iter().zip(&x).map(|(c, x)| c * x).sum::<f64>() + l.constant)
                }
                Constraint::OrderAtLeast(p) => {
                    for level in &enumerate_trees(*p).expect("valid order")[..] {
                        for t in level {
                            out.push(elementary_weight(t, tab) - 1.0 / tree_density(t) as f64);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Linear form: coefficient vector and constant.
type LinForm = (Vec<f64>, f64);

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> std::result::Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if "+-*/()".contains(ch) {
            out.push(Tok::Op(ch));
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_digit()
                    || chars[i] == '.'
                    || chars[i] == 'e'
                    || ((chars[i] == '-' || chars[i] == '+') && i > start && chars[i - 1] == 'e'))
            {
                i += 1;
            }
            let t: String = chars[start..i].iter().collect();
            out.push(Tok::Num(t.parse().map_err(|_| format!("bad number `{t}`"))?));
        } else if ch.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else {
            return Err(format!("unexpected character `{ch}`"));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    stages: usize,
}

impl Parser<'_> {
    fn nvars(&self) -> usize {
        self.stages + self.stages * self.stages
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn expr(&mut self) -> std::result::Result<LinForm, String> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            let s = if op == '+' { 1.0 } else { -1.0 };
            acc.0.iter_mut().zip(&rhs.0).for_each(|(a, b)| *a += s * b);
            acc.1 += s * rhs.1;
        }
        Ok(acc)
    }

    fn term(&mut self) -> std::result::Result<LinForm, String> {
        let mut acc = self.factor()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.factor()?;
            let is_const = |f: &LinForm| f.0.iter().all(|c| *c == 0.0);
            acc = match op {
                '*' if is_const(&acc) => scale(&rhs, acc.1),
                '*' if is_const(&rhs) => scale(&acc, rhs.1),
                '*' => return Err("product of two coefficients is not linear".into()),
                _ if is_const(&rhs) && rhs.1 != 0.0 => scale(&acc, 1.0 / rhs.1),
                _ => return Err("division must be by a nonzero constant".into()),
            };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> std::result::Result<LinForm, String> {
        let n = self.nvars();
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok((vec![0.0; n], v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let idx = unknown_index(self.stages, &name)
                    .ok_or_else(|| format!("unknown coefficient `{name}` for {} stages", self.stages))?;
                let mut c = vec![0.0; n];
                c[idx] = 1.0;
                Ok((c, 0.0))
            }
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(scale(&self.factor()?, -1.0))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.factor()
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::Op(')')) {
                    return Err("missing `)`".into());
                }
                self.pos += 1;
                Ok(e)
            }
            Some(t) => Err(format!("unexpected token {t:?}")),
            None => Err("unexpected end of expression".into()),
        }
    }
}

fn scale(f: &LinForm, s: f64) -> LinForm {
    (f.0.iter().map(|c| c * s).collect(), f.1 * s)
}

fn parse_linear(stages: usize, s: &str) -> std::result::Result<LinForm, String> {
    let toks = tokenize(s)?;
    if toks.is_empty() {
        return Err("empty side of equation".into());
    }
    let mut p = Parser { toks: &toks, pos: 0, stages };
    let f = p.expr()?;
    if p.pos != toks.len() {
        return Err(format!("trailing input in `{}`", s.trim()));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_names_round_trip() {
        for r in 1..=3 {
            for i in 0..r + r * r {
                assert_eq!(unknown_index(r, &unknown_name(r, i)), Some(i));
            }
        }
        assert_eq!(unknown_index(2, "a13"), None);
        assert_eq!(unknown_index(2, "c1"), None);
    }

    #[test]
    fn parses_ratio_sum_and_order_lines() {
        let set = ConstraintSet::parse(3, "b1 = b3\n# comment\na13 + a31 = 5/18\na11 = 2*a12\norder >= 5").unwrap();
        assert_eq!(set.items().len(), 4);
        let Constraint::Linear(l) = &set.items()[1] else { panic!() };
        assert_eq!(l.coeffs[unknown_index(3, "a13").unwrap()], 1.0);
        assert_eq!(l.coeffs[unknown_index(3, "a31").unwrap()], 1.0);
        assert!((l.constant + 5.0 / 18.0).abs() < 1e-16);
        assert_eq!(set.max_order(), 5);
    }

    #[test]
    fn chained_equalities_expand() {
        let set = ConstraintSet::parse(3, "a23 = 0 = a13").unwrap();
        assert_eq!(set.items().len(), 2);
    }

    #[test]
    fn reports_line_numbers() {
        let e = ConstraintSet::parse(2, "b1 = b2\n\na12 = a22*a11").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = ConstraintSet::parse(2, "b1 = b7").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        assert!(ConstraintSet::parse(2, "order >= x").is_err());
        assert!(ConstraintSet::parse(2, "3 = 3").is_err());
    }

    #[test]
    fn order_bump_counts_new_conditions() {
        let set = ConstraintSet::parse(2, "order >= 3\nb1 = b2").unwrap();
        assert_eq!(set.equation_count(2), 3);
    }
}
