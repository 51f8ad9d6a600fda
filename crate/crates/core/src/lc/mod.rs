//! Probabilistic left-corner parsing of tag sequences.
//!
//! A model is compiled once into integer-indexed action tables. The beam
//! parser and the exhaustive parser share only those tables and the move
//! semantics in [`LcParser::effect`].

mod beam;
mod exhaustive;
mod store;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

pub use beam::{BeamOptions, ParserState, SearchSpace};
pub use exhaustive::LcDerivation;
pub use store::{Handle, PrefixStore};

use crate::error::{Error, Result};
use crate::grammar::{
    debinarize, replay, Choice, Composition, DeltaModel, LcMove, PlcgModel, Rule,
};
use crate::tree::Tree;

/// Which probability model and move semantics to parse with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    /// Attach decided once a constituent is complete.
    #[default]
    Base,
    /// Attach decided when a category matching the goal is projected.
    Compose,
    /// Stack composition scored through the change in stack size.
    Delta,
}

impl Variant {
    pub fn composition(self) -> Composition {
        match self {
            Variant::Base => Composition::Delayed,
            Variant::Compose | Variant::Delta => Composition::Immediate,
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(Variant::Base),
            "compose" => Ok(Variant::Compose),
            "delta" => Ok(Variant::Delta),
            _ => Err(Error::InvalidArgument(format!("unknown variant `{s}`"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Base => "base",
            Variant::Compose => "compose",
            Variant::Delta => "delta",
        })
    }
}

/// Stack entry: a sought goal or a found constituent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Entry {
    Sought(u32),
    Found { sym: u32, attachable: bool },
}

/// A parser move over compiled symbol and rule ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CMove {
    Shift(u32),
    Attach,
    Project { rule: u32, compose: bool },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub mv: CMove,
    pub log_prob: f64,
}

#[derive(Debug)]
struct CRule {
    rule: Rule,
    lhs: u32,
    rhs: Vec<u32>,
}

#[derive(Debug, Default)]
struct Actions {
    /// For an attachable left corner.
    attachable: Vec<Action>,
    /// For a projected left corner under stack composition.
    fixed: Vec<Action>,
}

#[derive(Debug)]
enum Scoring {
    /// Keyed by (lc, gc).
    Plcg(HashMap<(u32, u32), Actions>),
    /// Keyed by (stack size, lc, gc).
    Delta(HashMap<(u32, u32, u32), Actions>),
}

/// A left-corner model compiled for parsing.
#[derive(Debug)]
pub struct LcParser {
    variant: Variant,
    names: Vec<String>,
    ids: HashMap<String, u32>,
    rules: Vec<CRule>,
    start: u32,
    start_name: String,
    binarized: bool,
    /// Keyed by (gc, lc).
    shift: HashMap<(u32, u32), f64>,
    scoring: Scoring,
}

struct Interner {
    names: Vec<String>,
    ids: HashMap<String, u32>,
    rules: Vec<CRule>,
    rule_ids: HashMap<Rule, u32>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            names: Vec::new(),
            ids: HashMap::new(),
            rules: Vec::new(),
            rule_ids: HashMap::new(),
        }
    }

    fn sym(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        self.names.push(s.to_string());
        let id = self.names.len() as u32 - 1;
        self.ids.insert(s.to_string(), id);
        id
    }

    fn rule(&mut self, r: &Rule) -> u32 {
        if let Some(&id) = self.rule_ids.get(r) {
            return id;
        }
        let lhs = self.sym(&r.lhs);
        let rhs = r.rhs.iter().map(|s| self.sym(s)).collect();
        self.rules.push(CRule {
            rule: r.clone(),
            lhs,
            rhs,
        });
        let id = self.rules.len() as u32 - 1;
        self.rule_ids.insert(r.clone(), id);
        id
    }
}

fn push_action(v: &mut Vec<Action>, mv: CMove, p: f64) {
    if p > 0.0 {
        v.push(Action {
            mv,
            log_prob: p.ln(),
        });
    }
}

impl LcParser {
    /// Compiles a PLCG for the base or stack-composition variant.
    pub fn plcg(model: &PlcgModel, variant: Variant) -> Result<Self> {
        if variant == Variant::Delta {
            return Err(Error::InvalidArgument(
                "the delta variant needs a delta model".into(),
            ));
        }
        let mut i = Interner::new();
        let start = i.sym(&model.start);
        let mut shift = HashMap::new();
        for gc in model.goals() {
            for (lc, _) in model.shifts(gc) {
                let key = (i.sym(gc), i.sym(lc));
                shift.insert(key, model.p_shift(lc, gc).ln());
            }
        }
        let mut contexts: Vec<(String, String)> = model
            .projection_contexts()
            .map(|(g, l)| (l.to_string(), g.to_string()))
            .collect();
        contexts.extend(model.attach.keys().map(|s| (s.clone(), s.clone())));
        contexts.sort();
        contexts.dedup();
        let compose = variant == Variant::Compose;
        let mut table = HashMap::new();
        for (lc, gc) in contexts {
            let p_att = model.p_att(&lc, &gc);
            let mut acts = Actions::default();
            if lc == gc {
                push_action(&mut acts.attachable, CMove::Attach, p_att);
            }
            for (rule, _) in model.projections(&lc, &gc) {
                if !model.is_left_corner(&gc, &rule.lhs) {
                    continue;
                }
                let id = i.rule(rule);
                let p_lc = model.p_lc(rule, &lc, &gc);
                if compose && rule.lhs == gc {
                    let a = model.p_att(&gc, &gc);
                    for (done, q) in [(true, a), (false, 1.0 - a)] {
                        let mv = CMove::Project {
                            rule: id,
                            compose: done,
                        };
                        push_action(&mut acts.attachable, mv, (1.0 - p_att) * p_lc * q);
                        push_action(&mut acts.fixed, mv, p_lc * q);
                    }
                } else {
                    let mv = CMove::Project {
                        rule: id,
                        compose: false,
                    };
                    push_action(&mut acts.attachable, mv, (1.0 - p_att) * p_lc);
                    push_action(&mut acts.fixed, mv, p_lc);
                }
            }
            table.insert((i.sym(&lc), i.sym(&gc)), acts);
        }
        Ok(LcParser {
            variant,
            start,
            start_name: model.start.clone(),
            binarized: model.binarized,
            shift,
            scoring: Scoring::Plcg(table),
            names: i.names,
            ids: i.ids,
            rules: i.rules,
        })
    }

    /// Compiles a stack-size model for the delta variant.
    pub fn delta(model: &DeltaModel) -> Self {
        let mut i = Interner::new();
        let start = i.sym(&model.start);
        let mut shift = HashMap::new();
        for (gc, lcs) in &model.shift {
            for lc in lcs.keys() {
                let key = (i.sym(gc), i.sym(lc));
                shift.insert(key, model.p_shift(lc, gc).ln());
            }
        }
        let mut table = HashMap::new();
        for ((len, lc, gc), total) in &model.context_totals {
            let mut acts = Actions::default();
            for (delta, choice, count) in model.choices_at(*len, lc, gc) {
                let p = count as f64 / *total as f64;
                match choice {
                    Choice::Attach => {
                        if lc == gc && delta == -2 {
                            push_action(&mut acts.attachable, CMove::Attach, p);
                        }
                    }
                    Choice::Rule(rule) => {
                        let n = rule.arity() as i32;
                        let compose = if delta == n - 3 {
                            true
                        } else if delta == n - 1 {
                            false
                        } else {
                            continue;
                        };
                        if compose && rule.lhs != *gc {
                            continue;
                        }
                        let mv = CMove::Project {
                            rule: i.rule(rule),
                            compose,
                        };
                        push_action(&mut acts.attachable, mv, p);
                        push_action(&mut acts.fixed, mv, p);
                    }
                }
            }
            table.insert((*len as u32, i.sym(lc), i.sym(gc)), acts);
        }
        LcParser {
            variant: Variant::Delta,
            start,
            start_name: model.start.clone(),
            binarized: model.binarized,
            shift,
            scoring: Scoring::Delta(table),
            names: i.names,
            ids: i.ids,
            rules: i.rules,
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn start(&self) -> &str {
        &self.start_name
    }

    pub fn symbol(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, sym: u32) -> &str {
        &self.names[sym as usize]
    }

    pub fn initial_entry(&self) -> Entry {
        Entry::Sought(self.start)
    }

    /// Log probability of shifting `lc` under goal `gc`.
    pub fn shift_log_prob(&self, gc: u32, lc: u32) -> f64 {
        self.shift
            .get(&(gc, lc))
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }

    /// Non-shift moves available with found `top` over sought `below` in a
    /// stack of `len` entries, with their log probabilities.
    pub fn actions(&self, top: Entry, below: Option<Entry>, len: usize) -> &[Action] {
        let (
            Entry::Found {
                sym: lc,
                attachable,
            },
            Some(Entry::Sought(gc)),
        ) = (top, below)
        else {
            return &[];
        };
        let acts = match &self.scoring {
            Scoring::Plcg(t) => t.get(&(lc, gc)),
            Scoring::Delta(t) => t.get(&((len - 1) as u32, lc, gc)),
        };
        match acts {
            Some(a) if attachable => &a.attachable,
            Some(a) => &a.fixed,
            None => &[],
        }
    }

    /// Entries popped and pushed by a move, given the current top.
    pub fn effect(&self, mv: CMove, top: Option<Entry>) -> (usize, Vec<Entry>) {
        match mv {
            CMove::Shift(sym) => (
                0,
                vec![Entry::Found {
                    sym,
                    attachable: true,
                }],
            ),
            CMove::Attach => (2, Vec::new()),
            CMove::Project { rule, compose } => {
                debug_assert!(matches!(top, Some(Entry::Found { .. })));
                let r = &self.rules[rule as usize];
                let mut push = Vec::with_capacity(r.rhs.len());
                if !compose {
                    push.push(Entry::Found {
                        sym: r.lhs,
                        attachable: self.variant == Variant::Base,
                    });
                }
                push.extend(r.rhs[1..].iter().rev().map(|&s| Entry::Sought(s)));
                (if compose { 2 } else { 1 }, push)
            }
        }
    }

    pub fn to_move(&self, mv: CMove) -> LcMove {
        match mv {
            CMove::Shift(sym) => LcMove::Shift(self.names[sym as usize].clone()),
            CMove::Attach => LcMove::Attach,
            CMove::Project { rule, compose } => LcMove::Project {
                rule: self.rules[rule as usize].rule.clone(),
                compose,
            },
        }
    }

    /// Rebuilds the tree of a complete move sequence, undoing binarization
    /// for binarized models.
    pub fn tree_of(&self, moves: &[CMove]) -> Result<Tree> {
        let moves: Vec<LcMove> = moves.iter().map(|&m| self.to_move(m)).collect();
        let t = replay(&moves, &self.start_name, self.variant.composition())?;
        Ok(if self.binarized { debinarize(&t) } else { t })
    }

    /// Rebuilds the tree of the move sequence stored under `handle`.
    pub fn recover_tree(&self, store: &PrefixStore<CMove>, handle: Handle) -> Result<Tree> {
        self.tree_of(&store.to_vec(handle))
    }

    fn tag_ids<S: AsRef<str>>(&self, tags: &[S]) -> Option<Vec<u32>> {
        tags.iter().map(|t| self.symbol(t.as_ref())).collect()
    }
}

#[cfg(test)]
mod tests;
