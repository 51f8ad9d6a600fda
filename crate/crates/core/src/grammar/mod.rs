//! Grammar induction, left-corner derivations and grammar transforms.

mod delta;
mod derivation;
pub mod io;
mod pcfg;
mod plcg;
mod tagging;
mod transform;

use std::fmt;

pub use delta::{projection_delta, Choice, DeltaModel};
pub use derivation::{lc_derivation, replay, simulate, Composition, LcMove, Step, StepKind};
pub use pcfg::PcfgModel;
pub use plcg::PlcgModel;
pub use tagging::{tag_probability, TaggingStats, BOUNDARY_TAG};
pub use transform::{binarize, binarize_weighted_rules, debinarize, BINARIZE_SEPARATOR};

use crate::tree::Tree;

/// A context-free production `lhs -> rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub lhs: String,
    pub rhs: Vec<String>,
}

impl Rule {
    pub fn new<S: Into<String>>(lhs: impl Into<String>, rhs: impl IntoIterator<Item = S>) -> Self {
        let rule = Rule {
            lhs: lhs.into(),
            rhs: rhs.into_iter().map(Into::into).collect(),
        };
        assert!(!rule.rhs.is_empty(), "rule with empty right-hand side");
        rule
    }

    /// The local tree rooted at an internal node.
    pub fn of_node(t: &Tree) -> Rule {
        debug_assert!(!t.is_leaf());
        Rule {
            lhs: t.label.clone(),
            rhs: t.children.iter().map(|c| c.label.clone()).collect(),
        }
    }

    pub fn left_corner(&self) -> &str {
        &self.rhs[0]
    }

    pub fn arity(&self) -> usize {
        self.rhs.len()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ->", self.lhs)?;
        for s in &self.rhs {
            write!(f, " {s}")?;
        }
        Ok(())
    }
}

/// Every local tree of `t`, pre-order.
pub fn local_trees(t: &Tree) -> Vec<Rule> {
    let mut out = Vec::new();
    t.walk(&mut |n| {
        if !n.is_leaf() {
            out.push(Rule::of_node(n));
        }
    });
    out
}

fn ln(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
