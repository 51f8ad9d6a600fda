//! Bracket scoring: precision, recall, crossing brackets.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::tree::Tree;
use crate::treebank::{is_treebank_shaped, ROOT_LABEL};

/// A labelled span over leaf positions, end exclusive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bracket {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

impl Bracket {
    pub fn new(start: usize, end: usize, label: impl Into<String>) -> Self {
        Bracket {
            start,
            end,
            label: label.into(),
        }
    }

    /// True if the two spans overlap without either containing the other.
    pub fn crosses(&self, other: &Bracket) -> bool {
        (other.start < self.start && self.start < other.end && other.end < self.end)
            || (self.start < other.start && other.start < self.end && self.end < other.end)
    }
}

/// Brackets of `t`, sorted. A ROOT-labelled top node and preterminals are
/// excluded; in a tree with bare words among its nodes, every non-leaf node
/// is a constituent. Without `include_unary`, single-word spans and nodes
/// whose parent has no other child are dropped, so a unary chain keeps only
/// its outermost label.
pub fn brackets(t: &Tree, include_unary: bool) -> Vec<Bracket> {
    let tagged = is_treebank_shaped(t);
    let mut out = Vec::new();
    collect(t, 0, None, tagged, include_unary, &mut out);
    out.sort();
    out
}

fn collect(
    t: &Tree,
    start: usize,
    parent: Option<&Tree>,
    tagged: bool,
    include_unary: bool,
    out: &mut Vec<Bracket>,
) -> usize {
    if t.is_leaf() {
        return start + 1;
    }
    let mut end = start;
    for c in &t.children {
        end = collect(c, end, Some(t), tagged, include_unary, out);
    }
    let is_root = parent.is_none() && t.label == ROOT_LABEL;
    let is_tag = tagged && t.is_preterminal();
    let keep = if include_unary {
        true
    } else {
        let under_unary = parent.is_some_and(|p| p.children.len() == 1 && p.label != ROOT_LABEL);
        end - start > 1 && !under_unary
    };
    if !is_root && !is_tag && keep && end > start {
        out.push(Bracket::new(start, end, t.label.clone()));
    }
    end
}

/// Bracket counts for one sentence under one scoring variant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub matched: usize,
    pub test: usize,
    pub gold: usize,
    /// Test brackets crossing some gold bracket.
    pub crossing: usize,
}

impl Counts {
    pub fn precision_errors(&self) -> usize {
        self.test - self.matched
    }

    pub fn recall_errors(&self) -> usize {
        self.gold - self.matched
    }

    fn add(&mut self, o: &Counts) {
        self.matched += o.matched;
        self.test += o.test;
        self.gold += o.gold;
        self.crossing += o.crossing;
    }
}

fn multiset_matches<K: Ord>(gold: impl Iterator<Item = K>, test: impl Iterator<Item = K>) -> usize {
    let mut bag: BTreeMap<K, usize> = BTreeMap::new();
    for k in gold {
        *bag.entry(k).or_default() += 1;
    }
    let mut n = 0;
    for k in test {
        if let Some(c) = bag.get_mut(&k) {
            if *c > 0 {
                *c -= 1;
                n += 1;
            }
        }
    }
    n
}

fn crossing_count(gold: &[Bracket], test: &[Bracket]) -> usize {
    test.iter()
        .filter(|b| gold.iter().any(|g| b.crosses(g)))
        .count()
}

fn check_yield(index: usize, gold: &Tree, test: &Tree) -> Result<()> {
    if gold.leaves() == test.leaves() {
        Ok(())
    } else {
        Err(Error::YieldMismatch { index })
    }
}

fn counts(gold: &[Bracket], test: &[Bracket], labelled: bool, crossing: usize) -> Counts {
    let matched = if labelled {
        multiset_matches(gold.iter(), test.iter())
    } else {
        multiset_matches(
            gold.iter().map(|b| (b.start, b.end)),
            test.iter().map(|b| (b.start, b.end)),
        )
    };
    Counts {
        matched,
        test: test.len(),
        gold: gold.len(),
        crossing,
    }
}

/// Scores `test` against `gold`. Crossing brackets are always counted on
/// the brackets without unary nodes.
pub fn score(gold: &Tree, test: &Tree, labelled: bool, include_unary: bool) -> Result<Counts> {
    check_yield(0, gold, test)?;
    let (g, t) = (brackets(gold, false), brackets(test, false));
    let crossing = crossing_count(&g, &t);
    if include_unary {
        Ok(counts(
            &brackets(gold, true),
            &brackets(test, true),
            labelled,
            crossing,
        ))
    } else {
        Ok(counts(&g, &t, labelled, crossing))
    }
}

/// Every scoring variant for one sentence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SentenceScore {
    pub length: usize,
    pub unlabelled: Counts,
    pub labelled: Counts,
    pub labelled_plus1: Counts,
}

impl SentenceScore {
    pub fn crossing(&self) -> usize {
        self.unlabelled.crossing
    }
}

/// Scores sentence `index` of a corpus.
pub fn score_sentence(index: usize, gold: &Tree, test: &Tree) -> Result<SentenceScore> {
    check_yield(index, gold, test)?;
    let (g, t) = (brackets(gold, false), brackets(test, false));
    let crossing = crossing_count(&g, &t);
    Ok(SentenceScore {
        length: gold.leaf_count(),
        unlabelled: counts(&g, &t, false, crossing),
        labelled: counts(&g, &t, true, crossing),
        labelled_plus1: counts(&brackets(gold, true), &brackets(test, true), true, crossing),
    })
}

/// Corpus-level scores, micro-averaged over sentences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub labelled_precision: f64,
    pub labelled_recall: f64,
    pub labelled_precision_plus1: f64,
    pub labelled_recall_plus1: f64,
    pub avg_cbs: f64,
    pub noncrossing_accuracy: f64,
    pub zero_cb_rate: f64,
    pub sentence_count: usize,
    pub average_length: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Micro-averaged report. Ratios with a zero denominator are 1.
pub fn aggregate(scores: &[SentenceScore]) -> EvalReport {
    let (mut u, mut l, mut p) = (Counts::default(), Counts::default(), Counts::default());
    let mut words = 0;
    let mut zero_cb = 0;
    for s in scores {
        u.add(&s.unlabelled);
        l.add(&s.labelled);
        p.add(&s.labelled_plus1);
        words += s.length;
        zero_cb += usize::from(s.crossing() == 0);
    }
    let n = scores.len();
    EvalReport {
        precision: ratio(u.matched, u.test),
        recall: ratio(u.matched, u.gold),
        labelled_precision: ratio(l.matched, l.test),
        labelled_recall: ratio(l.matched, l.gold),
        labelled_precision_plus1: ratio(p.matched, p.test),
        labelled_recall_plus1: ratio(p.matched, p.gold),
        avg_cbs: if n == 0 {
            0.0
        } else {
            u.crossing as f64 / n as f64
        },
        noncrossing_accuracy: 1.0
            - if u.test == 0 {
                0.0
            } else {
                u.crossing as f64 / u.test as f64
            },
        zero_cb_rate: ratio(zero_cb, n),
        sentence_count: n,
        average_length: if n == 0 { 0.0 } else { words as f64 / n as f64 },
    }
}

/// Scores aligned corpora.
pub fn evaluate(gold: &[Tree], test: &[Tree]) -> Result<EvalReport> {
    if gold.len() != test.len() {
        return Err(Error::InvalidArgument(format!(
            "{} gold trees but {} test trees",
            gold.len(),
            test.len()
        )));
    }
    let scores = gold
        .iter()
        .zip(test)
        .enumerate()
        .map(|(i, (g, t))| score_sentence(i, g, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(&scores))
}

impl EvalReport {
    /// Rows of the printed table, ratios as percentages.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("Precision", 100.0 * self.precision),
            ("Recall", 100.0 * self.recall),
            ("Labelled Precision", 100.0 * self.labelled_precision),
            ("Labelled Recall", 100.0 * self.labelled_recall),
            (
                "Labelled Precision +1",
                100.0 * self.labelled_precision_plus1,
            ),
            ("Labelled Recall +1", 100.0 * self.labelled_recall_plus1),
            ("Average CBs", self.avg_cbs),
            ("Non-crossing accuracy", 100.0 * self.noncrossing_accuracy),
            ("Sentences with 0 CBs", 100.0 * self.zero_cb_rate),
        ]
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<24}{:>8}",
            "Test set (sentences)", self.sentence_count
        )?;
        writeln!(
            f,
            "{:<24}{:>8.1}",
            "Average length (words)", self.average_length
        )?;
        for (name, v) in self.rows() {
            let prec = if name == "Average CBs" { 2 } else { 1 };
            writeln!(f, "{name:<24}{v:>8.prec$}")?;
        }
        Ok(())
    }
}
