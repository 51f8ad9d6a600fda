use std::collections::{BTreeMap, BTreeSet};

use super::derivation::{lc_derivation, simulate, Composition, Step, StepKind};
use super::{ln, ratio, Rule};
use crate::error::{Error, Result};
use crate::tree::Tree;

/// Probabilistic left-corner grammar.
///
/// Shifts are conditioned on the goal, the attach/project decision on the
/// pair of left corner and goal, and the projected rule on the same pair.
/// Attach events only exist where the left corner equals the goal, so
/// attach counts are keyed by a single category; the total for that key
/// includes every projection made in the same configuration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlcgModel {
    pub start: String,
    pub binarized: bool,
    pub(crate) shift: BTreeMap<String, BTreeMap<String, u64>>,
    pub(crate) shift_totals: BTreeMap<String, u64>,
    pub(crate) attach: BTreeMap<String, u64>,
    /// Keyed by (gc, lc).
    pub(crate) proj: BTreeMap<(String, String), BTreeMap<Rule, u64>>,
    pub(crate) proj_totals: BTreeMap<(String, String), u64>,
    closure: BTreeSet<(String, String)>,
}

impl PlcgModel {
    pub fn new(start: impl Into<String>) -> Self {
        PlcgModel {
            start: start.into(),
            ..Default::default()
        }
    }

    /// Counts the moves of the left-corner derivation of every tree.
    pub fn induce(trees: &[Tree]) -> Result<Self> {
        let first = trees.first().ok_or(Error::EmptyCorpus)?;
        let mut model = PlcgModel::new(first.label.clone());
        for t in trees {
            let moves = lc_derivation(t, Composition::Delayed);
            let (_, steps) = simulate(&moves, &t.label, Composition::Delayed)?;
            model.count_steps(&steps);
        }
        model.rebuild_closure();
        Ok(model)
    }

    fn count_steps(&mut self, steps: &[Step]) {
        for s in steps {
            match &s.kind {
                StepKind::Shift { lc, gc } => self.bump_shift(gc, lc, 1),
                StepKind::Attach { lc, .. } => self.bump_attach(lc, 1),
                StepKind::Project { lc, gc, rule, .. } => self.bump_proj(gc, lc, rule.clone(), 1),
            }
        }
    }

    fn bump_shift(&mut self, gc: &str, lc: &str, n: u64) {
        *self
            .shift
            .entry(gc.into())
            .or_default()
            .entry(lc.into())
            .or_default() += n;
        *self.shift_totals.entry(gc.into()).or_default() += n;
    }

    fn bump_attach(&mut self, sym: &str, n: u64) {
        *self.attach.entry(sym.into()).or_default() += n;
    }

    pub(crate) fn bump_proj(&mut self, gc: &str, lc: &str, rule: Rule, n: u64) {
        let key = (gc.to_string(), lc.to_string());
        *self.proj_totals.entry(key.clone()).or_default() += n;
        *self.proj.entry(key).or_default().entry(rule).or_default() += n;
    }

    pub fn add_shift(&mut self, gc: &str, lc: &str, count: u64) -> &mut Self {
        self.bump_shift(gc, lc, count);
        self
    }

    /// Records `count` attachments of a completed `sym` to a sought `sym`.
    pub fn add_attach(&mut self, sym: &str, count: u64) -> &mut Self {
        self.bump_attach(sym, count);
        self
    }

    pub fn add_projection(&mut self, gc: &str, rule: Rule, count: u64) -> &mut Self {
        let lc = rule.left_corner().to_string();
        self.bump_proj(gc, &lc, rule, count);
        self.rebuild_closure();
        self
    }

    pub(crate) fn rebuild_closure(&mut self) {
        let mut edges: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for rules in self.proj.values() {
            for r in rules.keys() {
                edges.entry(&r.lhs).or_default().insert(r.left_corner());
            }
        }
        let mut closure = BTreeSet::new();
        for &from in edges.keys() {
            let mut todo = vec![from];
            let mut seen = BTreeSet::from([from]);
            while let Some(x) = todo.pop() {
                for &y in edges.get(x).into_iter().flatten() {
                    if seen.insert(y) {
                        todo.push(y);
                    }
                }
            }
            seen.remove(from);
            closure.extend(seen.into_iter().map(|a| (from.to_string(), a.to_string())));
        }
        self.closure = closure;
    }

    /// Whether `a` can be the left corner of a constituent of category `gc`
    /// (reflexively).
    pub fn is_left_corner(&self, gc: &str, a: &str) -> bool {
        gc == a || self.closure.contains(&(gc.to_string(), a.to_string()))
    }

    pub fn closure(&self) -> impl Iterator<Item = (&str, &str)> {
        self.closure.iter().map(|(g, a)| (g.as_str(), a.as_str()))
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

    pub fn attach_count(&self, sym: &str) -> u64 {
        self.attach.get(sym).copied().unwrap_or(0)
    }

    /// Attach decisions plus projections at (sym, sym).
    pub fn attach_total(&self, sym: &str) -> u64 {
        self.attach_count(sym) + self.proj_total(sym, sym)
    }

    pub fn p_att(&self, lc: &str, gc: &str) -> f64 {
        if lc != gc {
            return 0.0;
        }
        ratio(self.attach_count(lc), self.attach_total(lc))
    }

    fn proj_total(&self, gc: &str, lc: &str) -> u64 {
        self.proj_totals
            .get(&(gc.to_string(), lc.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn p_lc(&self, rule: &Rule, lc: &str, gc: &str) -> f64 {
        let key = (gc.to_string(), lc.to_string());
        let c = self
            .proj
            .get(&key)
            .and_then(|m| m.get(rule))
            .copied()
            .unwrap_or(0);
        ratio(c, self.proj_totals.get(&key).copied().unwrap_or(0))
    }

    /// Rules observed projecting from `lc` under goal `gc`, with counts.
    pub fn projections(&self, lc: &str, gc: &str) -> impl Iterator<Item = (&Rule, u64)> {
        self.proj
            .get(&(gc.to_string(), lc.to_string()))
            .into_iter()
            .flat_map(|m| m.iter().map(|(r, &c)| (r, c)))
    }

    pub fn shifts(&self, gc: &str) -> impl Iterator<Item = (&str, u64)> {
        self.shift
            .get(gc)
            .into_iter()
            .flat_map(|m| m.iter().map(|(w, &c)| (w.as_str(), c)))
    }

    /// Every (gc, lc) pair with projection events.
    pub fn projection_contexts(&self) -> impl Iterator<Item = (&str, &str)> {
        self.proj.keys().map(|(g, l)| (g.as_str(), l.as_str()))
    }

    pub fn goals(&self) -> impl Iterator<Item = &str> {
        self.shift.keys().map(String::as_str)
    }

    /// Distinct rules appearing in any projection table.
    pub fn rules(&self) -> BTreeSet<&Rule> {
        self.proj.values().flat_map(|m| m.keys()).collect()
    }

    pub fn table_sizes(&self) -> (usize, usize, usize) {
        let shifts = self.shift.values().map(BTreeMap::len).sum();
        let projs = self.proj.values().map(BTreeMap::len).sum();
        (shifts, self.attach.len(), projs)
    }

    /// Log probability of one move in its context.
    pub fn log_prob_step(&self, step: &Step, composition: Composition) -> f64 {
        match &step.kind {
            StepKind::Shift { lc, gc } => ln(self.p_shift(lc, gc)),
            StepKind::Attach { lc, gc } => ln(self.p_att(lc, gc)),
            StepKind::Project {
                lc,
                gc,
                rule,
                compose,
                attachable,
            } => {
                let mut p = self.p_lc(rule, lc, gc);
                if *attachable {
                    p *= 1.0 - self.p_att(lc, gc);
                }
                if composition == Composition::Immediate && rule.lhs == *gc {
                    let a = self.p_att(gc, gc);
                    p *= if *compose { a } else { 1.0 - a };
                }
                ln(p)
            }
        }
    }

    pub fn log_prob_steps(&self, steps: &[Step], composition: Composition) -> f64 {
        steps
            .iter()
            .map(|s| self.log_prob_step(s, composition))
            .sum()
    }

    /// Log probability of the unique derivation of `t`; `-inf` if the
    /// tree is not rooted at the start category.
    pub fn log_prob_tree(&self, t: &Tree, composition: Composition) -> f64 {
        let moves = lc_derivation(t, composition);
        match simulate(&moves, &self.start, composition) {
            Ok((_, steps)) => self.log_prob_steps(&steps, composition),
            Err(_) => f64::NEG_INFINITY,
        }
    }

    /// Largest deviation from one over every conditional distribution.
    pub fn normalization_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (gc, m) in &self.shift {
            let s: f64 = m.keys().map(|lc| self.p_shift(lc, gc)).sum();
            worst = worst.max((s - 1.0).abs());
        }
        for ((gc, lc), m) in &self.proj {
            let s: f64 = m.keys().map(|r| self.p_lc(r, lc, gc)).sum();
            worst = worst.max((s - 1.0).abs());
        }
        // Configurations where an attach is possible: attach plus projection.
        for sym in self.attach.keys() {
            let p_att = self.p_att(sym, sym);
            let proj: f64 = self
                .projections(sym, sym)
                .map(|(r, _)| self.p_lc(r, sym, sym))
                .sum();
            let s = p_att
                + (1.0 - p_att)
                    * if self.proj_total(sym, sym) > 0 {
                        proj
                    } else {
                        1.0
                    };
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }

    /// Whether every projected rule's mother is a left corner of its goal.
    pub fn respects_closure(&self) -> bool {
        self.proj
            .iter()
            .all(|((gc, _), m)| m.keys().all(|r| self.is_left_corner(gc, &r.lhs)))
    }
}
