use std::collections::BTreeMap;
use std::sync::OnceLock;

use super::ButcherTableau;
use crate::error::{Error, Result};

/// Rooted tree with unordered children, kept in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RootedTree {
    children: Vec<RootedTree>,
    order: usize,
}

impl RootedTree {
    pub fn leaf() -> Self {
        Self { children: Vec::new(), order: 1 }
    }

    pub fn from_children(mut children: Vec<RootedTree>) -> Self {
        children.sort_by(|x, y| x.order.cmp(&y.order).then_with(|| x.encoding().cmp(&y.encoding())));
        let order = 1 + children.iter().map(|c| c.order).sum::<usize>();
        Self { children, order }
    }

    /// Chain (tall tree) with `n` nodes.
    pub fn chain(n: usize) -> Self {
        assert!(n >= 1);
        (1..n).fold(Self::leaf(), |t, _| Self::from_children(vec![t]))
    }

    /// Root with `n - 1` leaf children.
    pub fn bushy(n: usize) -> Self {
        assert!(n >= 1);
        Self::from_children(vec![Self::leaf(); n - 1])
    }

    pub fn children(&self) -> &[RootedTree] {
        &self.children
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Canonical bracket encoding, e.g. `(()(()))`.
    pub fn encoding(&self) -> String {
        let mut s = String::with_capacity(2 * self.order);
        self.encode_into(&mut s);
        s
    }

    fn encode_into(&self, s: &mut String) {
        s.push('(');
        for c in &self.children {
            c.encode_into(s);
        }
        s.push(')');
    }

    /// All trees obtained by attaching one new leaf to some node.
    fn grafts(&self) -> Vec<RootedTree> {
        let mut out = vec![{
            let mut ch = self.children.clone();
            ch.push(Self::leaf());
            Self::from_children(ch)
        }];
        for i in 0..self.children.len() {
            for g in self.children[i].grafts() {
                let mut ch = self.children.clone();
                ch[i] = g;
                out.push(Self::from_children(ch));
            }
        }
        out
    }
}

/// All non-isomorphic rooted trees of orders 1..=max_order, grouped by order.
pub fn enumerate_trees(max_order: usize) -> Result<Vec<Vec<RootedTree>>> {
    if !(1..=10).contains(&max_order) {
        return Err(Error::TreeOrder(max_order));
    }
    let mut levels = vec![vec![RootedTree::leaf()]];
    for _ in 1..max_order {
        let mut next = BTreeMap::new();
        for t in levels.last().unwrap() {
            for g in t.grafts() {
                next.entry(g.encoding()).or_insert(g);
            }
        }
        levels.push(next.into_values().collect());
    }
    Ok(levels)
}

fn cached_trees() -> &'static [Vec<RootedTree>] {
    static TREES: OnceLock<Vec<Vec<RootedTree>>> = OnceLock::new();
    TREES.get_or_init(|| enumerate_trees(MAX_ORDER).expect("valid order"))
}

const MAX_ORDER: usize = 8;

/// γ(t) = |t| · Π γ(children).
pub fn tree_density(t: &RootedTree) -> u64 {
    t.order as u64 * t.children.iter().map(tree_density).product::<u64>()
}

/// Φ(t) = Σ_r b_r Ψ_r(t) with Ψ_r(t) = Π_children Σ_s a_rs Ψ_s(child).
pub fn elementary_weight(t: &RootedTree, tab: &ButcherTableau) -> f64 {
    let psi = stage_weights(t, tab);
    tab.b().iter().zip(&psi).map(|(b, p)| b * p).sum()
}

fn stage_weights(t: &RootedTree, tab: &ButcherTableau) -> Vec<f64> {
    let r = tab.stages();
    let mut out = vec![1.0; r];
    for child in &t.children {
        let inner = stage_weights(child, tab);
        for (i, o) in out.iter_mut().enumerate() {
            *o *= (0..r).map(|s| tab.a(i, s) * inner[s]).sum::<f64>();
        }
    }
    out
}

/// Largest p ≤ 8 with |Φ(t) − 1/γ(t)| ≤ tol for all trees of order ≤ p.
pub fn order_of_accuracy(tab: &ButcherTableau, tol: f64) -> usize {
    let mut p = 0;
    for level in cached_trees() {
        let ok = level.iter().all(|t| (elementary_weight(t, tab) - 1.0 / tree_density(t) as f64).abs() <= tol);
        if !ok {
            break;
        }
        p += 1;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_known_sequence() {
        let trees = enumerate_trees(10).unwrap();
        let counts: Vec<usize> = trees.iter().map(Vec::len).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 9, 20, 48, 115, 286, 719]);
    }

    #[test]
    fn rejects_out_of_range_order() {
        assert!(enumerate_trees(0).is_err());
        assert!(enumerate_trees(11).is_err());
    }

    #[test]
    fn canonical_form_ignores_child_order() {
        let a = RootedTree::from_children(vec![RootedTree::leaf(), RootedTree::chain(2)]);
        let b = RootedTree::from_children(vec![RootedTree::chain(2), RootedTree::leaf()]);
        assert_eq!(a, b);
        assert_eq!(a.encoding(), "(()(()))");
        assert_eq!(a.order(), 4);
    }

    #[test]
    fn densities() {
        assert_eq!(tree_density(&RootedTree::leaf()), 1);
        assert_eq!(tree_density(&RootedTree::bushy(3)), 3);
        assert_eq!(tree_density(&RootedTree::chain(3)), 6);
        assert_eq!(tree_density(&RootedTree::chain(4)), 24);
        assert_eq!(tree_density(&RootedTree::bushy(4)), 4);
    }

    #[test]
    fn forward_euler_weights() {
        let fe = ButcherTableau::new("FE", vec![vec![0.0]], vec![1.0]).unwrap();
        assert_eq!(elementary_weight(&RootedTree::leaf(), &fe), 1.0);
        assert_eq!(elementary_weight(&RootedTree::chain(2), &fe), 0.0);
        assert_eq!(order_of_accuracy(&fe, 1e-10), 1);
    }
}
