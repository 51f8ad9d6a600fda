use std::collections::BTreeMap;

use super::derivation::{lc_derivation, simulate, Composition, Step, StepKind};
use super::{ln, ratio, Rule};
use crate::error::{Error, Result};
use crate::tree::Tree;

/// A non-shift decision of the stack-composition parser.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Choice {
    Attach,
    /// Projection of a rule. Whether it composes follows from the rule's
    /// arity and the change in stack size.
    Rule(Rule),
}

/// Context of a non-shift decision: stack size, left corner, goal.
pub type DeltaContext = (usize, String, String);

/// Left-corner model over stack-composition derivations that first
/// predicts the change in stack size from (stack size, left corner, goal)
/// and then the move given that change.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeltaModel {
    pub start: String,
    pub binarized: bool,
    pub(crate) shift: BTreeMap<String, BTreeMap<String, u64>>,
    pub(crate) shift_totals: BTreeMap<String, u64>,
    pub(crate) choices: BTreeMap<DeltaContext, BTreeMap<i32, BTreeMap<Choice, u64>>>,
    pub(crate) context_totals: BTreeMap<DeltaContext, u64>,
}

/// Stack-size change of a projection.
pub fn projection_delta(rule: &Rule, compose: bool) -> i32 {
    rule.arity() as i32 - if compose { 3 } else { 1 }
}

impl DeltaModel {
    pub fn new(start: impl Into<String>) -> Self {
        DeltaModel {
            start: start.into(),
            ..Default::default()
        }
    }

    /// Counts the moves of the stack-composition derivation of every tree.
    pub fn induce(trees: &[Tree]) -> Result<Self> {
        let first = trees.first().ok_or(Error::EmptyCorpus)?;
        let mut model = DeltaModel::new(first.label.clone());
        for t in trees {
            let moves = lc_derivation(t, Composition::Immediate);
            let (_, steps) = simulate(&moves, &t.label, Composition::Immediate)?;
            for s in &steps {
                model.count_step(s);
            }
        }
        Ok(model)
    }

    fn count_step(&mut self, s: &Step) {
        match &s.kind {
            StepKind::Shift { lc, gc } => self.add_shift(gc, lc, 1),
            StepKind::Attach { lc, gc } => {
                self.add_choice(s.stack_size(), lc, gc, s.delta, Choice::Attach, 1)
            }
            StepKind::Project { lc, gc, rule, .. } => self.add_choice(
                s.stack_size(),
                lc,
                gc,
                s.delta,
                Choice::Rule(rule.clone()),
                1,
            ),
        }
    }

    pub fn add_shift(&mut self, gc: &str, lc: &str, count: u64) {
        *self
            .shift
            .entry(gc.into())
            .or_default()
            .entry(lc.into())
            .or_default() += count;
        *self.shift_totals.entry(gc.into()).or_default() += count;
    }

    pub fn add_choice(
        &mut self,
        len: usize,
        lc: &str,
        gc: &str,
        delta: i32,
        choice: Choice,
        count: u64,
    ) {
        let key = (len, lc.to_string(), gc.to_string());
        *self.context_totals.entry(key.clone()).or_default() += count;
        *self
            .choices
            .entry(key)
            .or_default()
            .entry(delta)
            .or_default()
            .entry(choice)
            .or_default() += count;
    }

    pub fn p_shift(&self, lc: &str, gc: &str) -> f64 {
        let c = self
            .shift
            .get(gc)
            .and_then(|m| m.get(lc))
            .copied()
            .unwrap_or(0);
        ratio(c, self.shift_totals.get(gc).copied().unwrap_or(0))
    }

    fn delta_count(&self, key: &DeltaContext, delta: i32) -> u64 {
        self.choices
            .get(key)
            .and_then(|m| m.get(&delta))
            .map(|m| m.values().sum())
            .unwrap_or(0)
    }

    pub fn p_delta(&self, delta: i32, len: usize, lc: &str, gc: &str) -> f64 {
        let key = (len, lc.to_string(), gc.to_string());
        ratio(
            self.delta_count(&key, delta),
            self.context_totals.get(&key).copied().unwrap_or(0),
        )
    }

    pub fn p_choice(&self, choice: &Choice, len: usize, lc: &str, gc: &str, delta: i32) -> f64 {
        let key = (len, lc.to_string(), gc.to_string());
        let c = self
            .choices
            .get(&key)
            .and_then(|m| m.get(&delta))
            .and_then(|m| m.get(choice))
            .copied()
            .unwrap_or(0);
        ratio(c, self.delta_count(&key, delta))
    }

    /// Every decision recorded in the given context, as (delta, choice, count).
    pub fn choices_at(
        &self,
        len: usize,
        lc: &str,
        gc: &str,
    ) -> impl Iterator<Item = (i32, &Choice, u64)> {
        self.choices
            .get(&(len, lc.to_string(), gc.to_string()))
            .into_iter()
            .flat_map(|m| {
                m.iter()
                    .flat_map(|(&d, cs)| cs.iter().map(move |(c, &n)| (d, c, n)))
            })
    }

    pub fn shifts(&self, gc: &str) -> impl Iterator<Item = (&str, u64)> {
        self.shift
            .get(gc)
            .into_iter()
            .flat_map(|m| m.iter().map(|(w, &c)| (w.as_str(), c)))
    }

    /// Distinct stack-size changes observed anywhere.
    pub fn observed_deltas(&self) -> Vec<i32> {
        let mut v: Vec<i32> = self
            .choices
            .values()
            .flat_map(|m| m.keys().copied())
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn context_count(&self) -> usize {
        self.choices.len()
    }

    pub fn log_prob_step(&self, step: &Step) -> f64 {
        let (lc, gc, choice) = match &step.kind {
            StepKind::Shift { lc, gc } => return ln(self.p_shift(lc, gc)),
            StepKind::Attach { lc, gc } => (lc, gc, Choice::Attach),
            StepKind::Project { lc, gc, rule, .. } => (lc, gc, Choice::Rule(rule.clone())),
        };
        let len = step.stack_size();
        ln(self.p_delta(step.delta, len, lc, gc) * self.p_choice(&choice, len, lc, gc, step.delta))
    }

    /// Log probability of the stack-composition derivation of `t`.
    pub fn log_prob_tree(&self, t: &Tree) -> f64 {
        let moves = lc_derivation(t, Composition::Immediate);
        match simulate(&moves, &self.start, Composition::Immediate) {
            Ok((_, steps)) => steps.iter().map(|s| self.log_prob_step(s)).sum(),
            Err(_) => f64::NEG_INFINITY,
        }
    }

    pub fn normalization_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (gc, m) in &self.shift {
            let s: f64 = m.keys().map(|lc| self.p_shift(lc, gc)).sum();
            worst = worst.max((s - 1.0).abs());
        }
        for ((len, lc, gc), by_delta) in &self.choices {
            let s: f64 = by_delta
                .keys()
                .map(|&d| self.p_delta(d, *len, lc, gc))
                .sum();
            worst = worst.max((s - 1.0).abs());
            for (&d, cs) in by_delta {
                let s: f64 = cs.keys().map(|c| self.p_choice(c, *len, lc, gc, d)).sum();
                worst = worst.max((s - 1.0).abs());
            }
        }
        worst
    }
}
