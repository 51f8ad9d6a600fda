use std::collections::BTreeMap;

use super::derivation::{lc_derivation, simulate, Composition, StepKind};
use crate::error::{Error, Result};
use crate::tree::Tree;
use crate::treebank::pos_yield;

/// Pseudo-tag padding the trigram history at the start of a sentence.
pub const BOUNDARY_TAG: &str = "<s>";

/// Relative-frequency statistics for scoring a word's tag from its goal
/// category and the two preceding tags.
#[derive(Debug, Clone, Default)]
pub struct TaggingStats {
    /// (word, gc) -> tag -> count
    lexical: BTreeMap<(String, String), BTreeMap<String, u64>>,
    words: BTreeMap<String, u64>,
    /// (p2, p1) -> tag -> count
    trigram: BTreeMap<(String, String), BTreeMap<String, u64>>,
    unigram: BTreeMap<String, u64>,
    total: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl TaggingStats {
    /// Collects statistics from word-level trees. The goal of each word is
    /// the category sought when it is shifted in the tree's left-corner
    /// derivation.
    pub fn from_trees(trees: &[Tree]) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut stats = TaggingStats::default();
        for t in trees {
            let moves = lc_derivation(t, Composition::Delayed);
            let (_, steps) = simulate(&moves, &t.label, Composition::Delayed)?;
            let shifts = steps.iter().filter_map(|s| match &s.kind {
                StepKind::Shift { lc, gc } => Some((lc.as_str(), gc.as_str())),
                _ => None,
            });
            let tags = pos_yield(t);
            let (mut p2, mut p1) = (BOUNDARY_TAG, BOUNDARY_TAG);
            for ((w, gc), p) in shifts.zip(tags) {
                stats.add_event(w, gc, p2, p1, p, 1);
                p2 = p1;
                p1 = p;
            }
        }
        Ok(stats)
    }

    /// Records `count` occurrences of tag `p` for word `w` under goal `gc`
    /// after tags `p2 p1`.
    pub fn add_event(&mut self, w: &str, gc: &str, p2: &str, p1: &str, p: &str, count: u64) {
        *self
            .lexical
            .entry((w.into(), gc.into()))
            .or_default()
            .entry(p.into())
            .or_default() += count;
        *self.words.entry(w.into()).or_default() += count;
        *self
            .trigram
            .entry((p2.into(), p1.into()))
            .or_default()
            .entry(p.into())
            .or_default() += count;
        *self.unigram.entry(p.into()).or_default() += count;
        self.total += count;
    }

    pub fn p_tag_given_word(&self, p: &str, w: &str, gc: &str) -> f64 {
        match self.lexical.get(&(w.to_string(), gc.to_string())) {
            Some(m) => ratio(m.get(p).copied().unwrap_or(0), m.values().sum()),
            None => 0.0,
        }
    }

    pub fn p_trigram(&self, p: &str, p2: &str, p1: &str) -> f64 {
        match self.trigram.get(&(p2.to_string(), p1.to_string())) {
            Some(m) => ratio(m.get(p).copied().unwrap_or(0), m.values().sum()),
            None => 0.0,
        }
    }

    pub fn p_unigram(&self, p: &str) -> f64 {
        ratio(self.unigram.get(p).copied().unwrap_or(0), self.total)
    }

    pub fn knows_word(&self, w: &str) -> bool {
        self.words.contains_key(w)
    }
}

/// Distribution over the tags of `word` approximating
/// P(p | w, gc, p2, p1) by P(p | w, gc) P(p | p2, p1) / P(p), renormalized
/// over the word's candidate tags.
pub fn tag_probability(
    word: &str,
    gc: &str,
    p2: &str,
    p1: &str,
    stats: &TaggingStats,
) -> Result<BTreeMap<String, f64>> {
    if !stats.knows_word(word) {
        return Err(Error::UnseenWord(word.to_string()));
    }
    let candidates = stats
        .lexical
        .get(&(word.to_string(), gc.to_string()))
        .ok_or_else(|| Error::UnseenContext(format!("word `{word}` under goal `{gc}`")))?;
    if !stats
        .trigram
        .contains_key(&(p2.to_string(), p1.to_string()))
    {
        return Err(Error::UnseenContext(format!("tag history `{p2} {p1}`")));
    }
    let mut dist: BTreeMap<String, f64> = candidates
        .keys()
        .map(|p| {
            let v = stats.p_tag_given_word(p, word, gc) * stats.p_trigram(p, p2, p1)
                / stats.p_unigram(p);
            (p.clone(), v)
        })
        .collect();
    let z: f64 = dist.values().sum();
    if z == 0.0 {
        return Err(Error::UnseenContext(format!(
            "no tag of `{word}` follows `{p2} {p1}`"
        )));
    }
    for v in dist.values_mut() {
        *v /= z;
    }
    Ok(dist)
}
