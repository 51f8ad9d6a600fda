//! Stack-size behaviour of stack-composition derivations.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::Result;
use crate::grammar::{binarize, lc_derivation, simulate, Composition};
use crate::tree::Tree;
use crate::treebank::{fold_unaries, is_treebank_shaped, UnaryMode, ROOT_LABEL};

/// Stack-size change columns, in printed order.
pub const DELTAS: [i32; 4] = [-2, -1, 0, 1];

/// Counts of non-shift moves by stack size and stack-size change.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StackStats {
    pub rows: BTreeMap<usize, BTreeMap<i32, u64>>,
    /// Longest stack reached by any derivation.
    pub max_depth: usize,
}

/// Unary folding, then delexicalization, then binarization.
pub fn prepare(t: &Tree) -> Result<Tree> {
    let folded = fold_unaries(t, UnaryMode::FoldUp, ROOT_LABEL);
    let tags = if is_treebank_shaped(&folded) {
        folded.delexicalize()
    } else {
        folded
    };
    binarize(&tags)
}

impl StackStats {
    pub fn new() -> Self {
        Self::default()
    }

    /// Counts the stack-composition derivation of `t` as is.
    pub fn add_tree(&mut self, t: &Tree) -> Result<()> {
        let moves = lc_derivation(t, Composition::Immediate);
        let (_, steps) = simulate(&moves, &t.label, Composition::Immediate)?;
        for s in &steps {
            let after = (s.stack_len as i64 + i64::from(s.delta)) as usize;
            self.max_depth = self.max_depth.max(s.stack_len).max(after);
            if !s.is_shift() {
                *self
                    .rows
                    .entry(s.stack_size())
                    .or_default()
                    .entry(s.delta)
                    .or_default() += 1;
            }
        }
        Ok(())
    }

    /// Counts every tree after [`prepare`].
    pub fn from_trees(trees: &[Tree]) -> Result<Self> {
        let mut stats = StackStats::new();
        for t in trees {
            stats.add_tree(&prepare(t)?)?;
        }
        Ok(stats)
    }

    pub fn row_total(&self, size: usize) -> u64 {
        self.rows.get(&size).map_or(0, |r| r.values().sum())
    }

    pub fn count(&self, size: usize, delta: i32) -> u64 {
        self.rows
            .get(&size)
            .and_then(|r| r.get(&delta))
            .copied()
            .unwrap_or(0)
    }

    /// Share of row `size` with change `delta`, in percent.
    pub fn percent(&self, size: usize, delta: i32) -> f64 {
        let total = self.row_total(size);
        if total == 0 {
            0.0
        } else {
            100.0 * self.count(size, delta) as f64 / total as f64
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn sign(d: i32) -> String {
    if d > 0 {
        format!("+{d}")
    } else {
        d.to_string()
    }
}

impl fmt::Display for StackStats {
    /// Largest stack size first; each cell is a count and its row share.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>5} {:>8}", "Stack", "Total")?;
        for d in DELTAS {
            write!(f, " {:>16}", sign(d))?;
        }
        writeln!(f)?;
        for (&size, row) in self.rows.iter().rev() {
            write!(f, "{size:>5} {:>8}", self.row_total(size))?;
            for d in DELTAS {
                let n = row.get(&d).copied().unwrap_or(0);
                if n == 0 {
                    write!(f, " {:>16}", 0)?;
                } else {
                    write!(f, " {:>16}", format!("{n} ({:.0}%)", self.percent(size, d)))?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::read_trees;

    fn one(s: &str) -> Tree {
        read_trees(s).unwrap().pop().unwrap()
    }

    #[test]
    fn right_branching_chain() {
        let mut s = StackStats::new();
        s.add_tree(&one("(S a (S b (S c d)))")).unwrap();
        assert_eq!(s.rows.keys().copied().collect::<Vec<_>>(), vec![1]);
        assert_eq!(s.count(1, -1), 3);
        assert_eq!(s.count(1, -2), 1);
        assert_eq!(s.max_depth, 2);
    }

    #[test]
    fn empty_input_gives_empty_table() {
        let s = StackStats::from_trees(&[]).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.to_string().lines().count(), 1);
    }

    #[test]
    fn prepare_folds_then_binarizes() {
        let t = one("(ROOT (S (NP (DT the) (JJ big) (NN dog)) (VP (VBD ran))))");
        assert_eq!(
            prepare(&t).unwrap().to_string(),
            "(ROOT (S (NP DT (NP@DT JJ NN)) VBD))"
        );
    }

    #[test]
    fn rows_sum_to_one_hundred() {
        let trees = read_trees(
            "(ROOT (S (NP (DT a) (NN b)) (VP (VB c) (NP (NP (DT d) (NN e)) (PP (IN f) (NP (NN g)))))))
             (ROOT (S (NP (NP (NN a)) (PP (IN b) (NP (DT c) (JJ d) (NN e)))) (VP (VB f))))",
        )
        .unwrap();
        let s = StackStats::from_trees(&trees).unwrap();
        assert!(!s.is_empty());
        for &size in s.rows.keys() {
            let sum: f64 = DELTAS.iter().map(|&d| s.percent(size, d)).sum();
            assert!((sum - 100.0).abs() < 1e-9);
            assert!(s.rows[&size].keys().all(|d| DELTAS.contains(d)));
        }
        let table = s.to_string();
        assert!(table.lines().next().unwrap().contains("+1"));
    }
}
