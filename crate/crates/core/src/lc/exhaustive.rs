use std::collections::HashMap;

use super::beam::words_needed;
use super::{CMove, Entry, LcParser};
use crate::error::{Error, Result};
use crate::grammar::LcMove;
use crate::tree::Tree;

/// A complete derivation found by exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct LcDerivation {
    pub moves: Vec<LcMove>,
    pub tree: Tree,
    pub log_prob: f64,
}

struct Search<'a> {
    parser: &'a LcParser,
    tags: Vec<u32>,
    max_unshifted: usize,
    limit: usize,
    stack: Vec<Entry>,
    moves: Vec<CMove>,
    found: Vec<(Vec<CMove>, f64)>,
}

impl Search<'_> {
    fn apply(&mut self, mv: CMove) -> (Vec<Entry>, usize) {
        let (pops, pushes) = self.parser.effect(mv, self.stack.last().copied());
        let popped = self.stack.split_off(self.stack.len() - pops);
        let pushed = pushes.len();
        self.stack.extend(pushes);
        self.moves.push(mv);
        (popped, pushed)
    }

    fn undo(&mut self, popped: Vec<Entry>, pushed: usize) {
        self.stack.truncate(self.stack.len() - pushed);
        self.stack.extend(popped);
        self.moves.pop();
    }

    fn run(&mut self, pos: usize, since_shift: usize, log_prob: f64) -> Result<()> {
        let remaining = self.tags.len() - pos;
        if words_needed(&self.stack) > remaining {
            return Ok(());
        }
        let Some(&top) = self.stack.last() else {
            if remaining == 0 {
                if self.found.len() >= self.limit {
                    return Err(Error::LimitExceeded(self.limit));
                }
                self.found.push((self.moves.clone(), log_prob));
            }
            return Ok(());
        };
        match top {
            Entry::Sought(gc) => {
                if remaining == 0 {
                    return Ok(());
                }
                let lc = self.tags[pos];
                let lp = self.parser.shift_log_prob(gc, lc);
                if lp > f64::NEG_INFINITY {
                    let (popped, pushed) = self.apply(CMove::Shift(lc));
                    self.run(pos + 1, 0, log_prob + lp)?;
                    self.undo(popped, pushed);
                }
            }
            Entry::Found { .. } => {
                if since_shift >= self.max_unshifted {
                    return Ok(());
                }
                let below = self.stack.len().checked_sub(2).map(|i| self.stack[i]);
                let actions = self.parser.actions(top, below, self.stack.len()).to_vec();
                for a in actions {
                    let (popped, pushed) = self.apply(a.mv);
                    self.run(pos, since_shift + 1, log_prob + a.log_prob)?;
                    self.undo(popped, pushed);
                }
            }
        }
        Ok(())
    }
}

impl LcParser {
    /// Every complete derivation over `tags`, best first. Fails once more
    /// than `limit` derivations have been found.
    pub fn exhaustive_parse<S: AsRef<str>>(
        &self,
        tags: &[S],
        limit: usize,
        max_unshifted: usize,
    ) -> Result<Vec<LcDerivation>> {
        let Some(ids) = self.tag_ids(tags) else {
            return Ok(Vec::new());
        };
        if ids.is_empty() {
            return Ok(Vec::new());
        }
        let mut search = Search {
            parser: self,
            tags: ids,
            max_unshifted,
            limit,
            stack: vec![self.initial_entry()],
            moves: Vec::new(),
            found: Vec::new(),
        };
        search.run(0, 0, 0.0)?;
        let mut out = search
            .found
            .into_iter()
            .map(|(moves, log_prob)| {
                Ok(LcDerivation {
                    tree: self.tree_of(&moves)?,
                    moves: moves.into_iter().map(|m| self.to_move(m)).collect(),
                    log_prob,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.sort_by(|a, b| b.log_prob.total_cmp(&a.log_prob));
        Ok(out)
    }

    /// Total probability of the derivations of all sentences of at most
    /// `max_len` words.
    pub fn language_mass(&self, max_len: usize, max_unshifted: usize) -> f64 {
        let mut by_goal: HashMap<u32, Vec<(u32, f64)>> = HashMap::new();
        for (&(gc, lc), &lp) in &self.shift {
            by_goal.entry(gc).or_default().push((lc, lp.exp()));
        }
        for v in by_goal.values_mut() {
            v.sort_by_key(|&(lc, _)| lc);
        }
        let mut memo = HashMap::new();
        self.mass(
            vec![self.initial_entry()],
            max_len,
            0,
            max_unshifted,
            &by_goal,
            &mut memo,
        )
    }

    fn mass(
        &self,
        stack: Vec<Entry>,
        budget: usize,
        since_shift: usize,
        max_unshifted: usize,
        by_goal: &HashMap<u32, Vec<(u32, f64)>>,
        memo: &mut HashMap<(Vec<Entry>, usize, usize), f64>,
    ) -> f64 {
        let Some(&top) = stack.last() else {
            return 1.0;
        };
        if words_needed(&stack) > budget {
            return 0.0;
        }
        let key = (stack, budget, since_shift);
        if let Some(&m) = memo.get(&key) {
            return m;
        }
        let stack = &key.0;
        let mut total = 0.0;
        match top {
            Entry::Sought(gc) => {
                for &(lc, p) in by_goal.get(&gc).into_iter().flatten() {
                    let mut next = stack.clone();
                    next.push(Entry::Found {
                        sym: lc,
                        attachable: true,
                    });
                    total += p * self.mass(next, budget - 1, 0, max_unshifted, by_goal, memo);
                }
            }
            Entry::Found { .. } if since_shift < max_unshifted => {
                let below = stack.len().checked_sub(2).map(|i| stack[i]);
                for a in self.actions(top, below, stack.len()) {
                    let (pops, pushes) = self.effect(a.mv, Some(top));
                    let mut next = stack[..stack.len() - pops].to_vec();
                    next.extend(pushes);
                    total += a.log_prob.exp()
                        * self.mass(next, budget, since_shift + 1, max_unshifted, by_goal, memo);
                }
            }
            Entry::Found { .. } => {}
        }
        memo.insert(key, total);
        total
    }
}
