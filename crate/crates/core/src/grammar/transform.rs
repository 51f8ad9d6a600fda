use std::collections::BTreeMap;

use super::Rule;
use crate::error::{Error, Result};
use crate::tree::Tree;

/// Joins a mother and its left corner into an introduced category.
pub const BINARIZE_SEPARATOR: char = '@';

fn introduced(lhs: &str, left_corner: &str) -> String {
    format!("{lhs}{BINARIZE_SEPARATOR}{left_corner}")
}

/// Replaces every node with three or more daughters `A -> X1 X2 .. Xn` by
/// `A -> X1 A@X1` over `A@X1 -> X2 .. Xn`, recursively, so n-ary rules
/// sharing a mother and left corner share their first binary rule.
pub fn binarize(t: &Tree) -> Result<Tree> {
    if t.is_leaf() {
        return Ok(t.clone());
    }
    if t.label.contains(BINARIZE_SEPARATOR) {
        return Err(Error::ReservedSymbol(t.label.clone()));
    }
    let children = t
        .children
        .iter()
        .map(binarize)
        .collect::<Result<Vec<_>>>()?;
    Ok(fold_tail(t.label.clone(), children))
}

fn fold_tail(label: String, mut children: Vec<Tree>) -> Tree {
    if children.len() <= 2 {
        return Tree::node(label, children);
    }
    let rest = children.split_off(1);
    let first = children.pop().unwrap();
    let tail_label = introduced(&label, &first.label);
    Tree::node(label, vec![first, fold_tail(tail_label, rest)])
}

/// Splices out every introduced internal node.
pub fn debinarize(t: &Tree) -> Tree {
    let mut children = Vec::with_capacity(t.children.len());
    for c in &t.children {
        let c = debinarize(c);
        if !c.is_leaf() && c.label.contains(BINARIZE_SEPARATOR) {
            children.extend(c.children);
        } else {
            children.push(c);
        }
    }
    Tree::node(t.label.clone(), children)
}

/// Binarizes a weighted rule set so that every tree keeps its probability:
/// the heads `A -> X1 A@X1` carry the merged mass of the n-ary rules they
/// stand for, and each tail is renormalized under its introduced mother.
pub fn binarize_weighted_rules<'a>(
    rules: impl IntoIterator<Item = (&'a Rule, f64)>,
) -> Vec<(Rule, f64)> {
    let mut out = Vec::new();
    let mut pending: Vec<(Rule, f64)> = rules.into_iter().map(|(r, p)| (r.clone(), p)).collect();
    while !pending.is_empty() {
        let mut heads: BTreeMap<(String, String), f64> = BTreeMap::new();
        let mut tails: Vec<(Rule, f64, (String, String))> = Vec::new();
        for (r, p) in pending.drain(..) {
            if r.arity() <= 2 {
                out.push((r, p));
                continue;
            }
            let key = (r.lhs.clone(), r.rhs[0].clone());
            *heads.entry(key.clone()).or_default() += p;
            let tail = Rule {
                lhs: introduced(&r.lhs, &r.rhs[0]),
                rhs: r.rhs[1..].to_vec(),
            };
            tails.push((tail, p, key));
        }
        for ((lhs, lc), &mass) in &heads {
            out.push((
                Rule::new(lhs.clone(), [lc.clone(), introduced(lhs, lc)]),
                mass,
            ));
        }
        let mut merged: BTreeMap<Rule, f64> = BTreeMap::new();
        for (tail, p, key) in tails {
            let mass = heads[&key];
            *merged.entry(tail).or_default() += if mass > 0.0 { p / mass } else { 0.0 };
        }
        pending.extend(merged);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::PcfgModel;
    use crate::treebank::read_trees;

    fn tree(s: &str) -> Tree {
        read_trees(s).unwrap().pop().unwrap()
    }

    #[test]
    fn ternary_rule_splits_in_two() {
        let t = tree("(NP Det JJ NN)");
        assert_eq!(binarize(&t).unwrap(), tree("(NP Det (NP@Det JJ NN))"));
    }

    #[test]
    fn long_rules_recurse() {
        let t = tree("(A w x y z)");
        assert_eq!(binarize(&t).unwrap(), tree("(A w (A@w x (A@w@x y z)))"));
        assert_eq!(debinarize(&binarize(&t).unwrap()), t);
    }

    #[test]
    fn binary_trees_are_unchanged() {
        let t = tree("(S (NP DT NN) (VP VB))");
        assert_eq!(binarize(&t).unwrap(), t);
        assert_eq!(debinarize(&t), t);
    }

    #[test]
    fn reserved_separator_is_rejected() {
        let t = tree("(S (A@B x) y)");
        assert!(matches!(binarize(&t), Err(Error::ReservedSymbol(l)) if l == "A@B"));
        // Leaves may contain it.
        assert!(binarize(&tree("(S x@y z)")).is_ok());
    }

    #[test]
    fn weighted_rules_keep_tree_probability() {
        let corpus = read_trees(
            "(S (NP DT JJ NN) VP) (S (NP DT NN NN) VP) (S (NP DT JJ JJ NN) VP) (S (NP DT NN) VP)",
        )
        .unwrap();
        let m = PcfgModel::induce(&corpus).unwrap();
        let bin: BTreeMap<Rule, f64> = binarize_weighted_rules(m.weighted_rules())
            .into_iter()
            .collect();
        for r in bin.keys() {
            assert!(r.arity() <= 2);
        }
        let head = &bin[&Rule::new("NP", ["DT", "NP@DT"])];
        assert!((head - 0.75).abs() < 1e-12);
        for t in &corpus {
            let direct = m.log_prob_tree(t);
            let b = binarize(t).unwrap();
            let via: f64 = crate::grammar::local_trees(&b)
                .iter()
                .map(|r| bin[r].ln())
                .sum();
            assert!((direct - via).abs() < 1e-12);
        }
    }
}
