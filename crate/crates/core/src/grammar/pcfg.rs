use std::collections::BTreeMap;

use super::{ln, local_trees, ratio, Rule};
use crate::error::{Error, Result};
use crate::tree::Tree;

/// Relative-frequency PCFG: each rule's probability is its count over the
/// total count of rules sharing its mother. No smoothing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PcfgModel {
    pub start: String,
    /// Set when the model was induced from binarized trees.
    pub binarized: bool,
    rules: BTreeMap<Rule, u64>,
    lhs_totals: BTreeMap<String, u64>,
}

impl PcfgModel {
    pub fn new(start: impl Into<String>) -> Self {
        PcfgModel {
            start: start.into(),
            ..Default::default()
        }
    }

    /// Counts every local tree in `trees`. The start category is the root
    /// label of the first tree.
    pub fn induce(trees: &[Tree]) -> Result<Self> {
        let first = trees.first().ok_or(Error::EmptyCorpus)?;
        let mut model = PcfgModel::new(first.label.clone());
        for t in trees {
            for r in local_trees(t) {
                model.add_rule(r, 1);
            }
        }
        Ok(model)
    }

    pub fn add_rule(&mut self, rule: Rule, count: u64) {
        *self.lhs_totals.entry(rule.lhs.clone()).or_default() += count;
        *self.rules.entry(rule).or_default() += count;
    }

    /// Merges the counts of `other` into `self`.
    pub fn merge(&mut self, other: &PcfgModel) {
        for (r, &c) in &other.rules {
            self.add_rule(r.clone(), c);
        }
    }

    pub fn count(&self, rule: &Rule) -> u64 {
        self.rules.get(rule).copied().unwrap_or(0)
    }

    pub fn prob(&self, rule: &Rule) -> f64 {
        ratio(
            self.count(rule),
            self.lhs_totals.get(&rule.lhs).copied().unwrap_or(0),
        )
    }

    pub fn rules(&self) -> impl Iterator<Item = (&Rule, u64)> {
        self.rules.iter().map(|(r, &c)| (r, c))
    }

    /// Rules with their probabilities.
    pub fn weighted_rules(&self) -> impl Iterator<Item = (&Rule, f64)> {
        self.rules.keys().map(move |r| (r, self.prob(r)))
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn lhs_total(&self, lhs: &str) -> u64 {
        self.lhs_totals.get(lhs).copied().unwrap_or(0)
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = &str> {
        self.lhs_totals.keys().map(String::as_str)
    }

    /// Log probability of a tree: the sum over its local trees. Leaves are
    /// terminals and contribute nothing.
    pub fn log_prob_tree(&self, t: &Tree) -> f64 {
        local_trees(t).iter().map(|r| ln(self.prob(r))).sum()
    }

    /// Rules by descending count, ties in rule order.
    pub fn top_rules(&self, n: usize) -> Vec<(&Rule, u64, f64)> {
        let mut v: Vec<_> = self
            .rules
            .iter()
            .map(|(r, &c)| (r, c, self.prob(r)))
            .collect();
        v.sort_by_key(|e| std::cmp::Reverse(e.1));
        v.truncate(n);
        v
    }

    /// Largest deviation from one of a per-mother probability sum.
    pub fn normalization_error(&self) -> f64 {
        let mut sums: BTreeMap<&str, f64> = BTreeMap::new();
        for (r, p) in self.weighted_rules() {
            *sums.entry(&r.lhs).or_default() += p;
        }
        sums.values().map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
    }
}
