//! Exhaustive CKY parsing of tag sequences under a PCFG.
//!
//! The grammar is binarized with merged tails so tree probabilities are
//! unchanged, parsed with a dense chart in log space, and the best tree is
//! debinarized. A right-hand-side symbol that is never a left-hand side is
//! a terminal and only matches an input tag.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::grammar::{binarize_weighted_rules, debinarize, PcfgModel, Rule, BINARIZE_SEPARATOR};
use crate::tree::Tree;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Back {
    Empty,
    Leaf,
    Unary(u32),
    Binary(u32, u32),
}

/// Scores this close are treated as equal so that summation order does not
/// decide between trees of the same probability.
const TIE_TOLERANCE: f64 = 1e-12;

fn beats(s: f64, cur: f64) -> bool {
    s > cur && !ties(s, cur)
}

fn ties(s: f64, cur: f64) -> bool {
    s == cur || (s - cur).abs() <= TIE_TOLERANCE * cur.abs().max(1.0)
}

#[derive(Debug)]
struct BinRule {
    lhs: u32,
    left: u32,
    right: u32,
    logp: f64,
    prob: f64,
}

#[derive(Debug)]
struct UnaryRule {
    lhs: u32,
    child: u32,
    logp: f64,
    prob: f64,
}

/// A PCFG compiled for repeated chart parsing.
#[derive(Debug)]
pub struct ChartParser {
    names: Vec<String>,
    introduced: Vec<bool>,
    terminals: HashMap<String, u32>,
    start: Option<u32>,
    binary: Vec<BinRule>,
    /// Binary rule indices by left daughter.
    by_left: Vec<Vec<u32>>,
    unary: Vec<UnaryRule>,
}

struct Cell {
    score: Vec<f64>,
    back: Vec<Back>,
}

impl ChartParser {
    pub fn new(model: &PcfgModel) -> Self {
        let weighted = binarize_weighted_rules(model.weighted_rules());
        let lhs: HashSet<&str> = weighted.iter().map(|(r, _)| r.lhs.as_str()).collect();
        let mut ids: HashMap<(String, bool), u32> = HashMap::new();
        let mut names = Vec::new();
        let mut terminal = Vec::new();
        let mut intern = |name: &str, term: bool| -> u32 {
            *ids.entry((name.to_string(), term)).or_insert_with(|| {
                names.push(name.to_string());
                terminal.push(term);
                names.len() as u32 - 1
            })
        };
        let mut binary = Vec::new();
        let mut unary = Vec::new();
        for (r, p) in &weighted {
            if *p <= 0.0 {
                continue;
            }
            let a = intern(&r.lhs, false);
            let kids: Vec<u32> = r
                .rhs
                .iter()
                .map(|s| intern(s, !lhs.contains(s.as_str())))
                .collect();
            match kids[..] {
                [b] => unary.push(UnaryRule {
                    lhs: a,
                    child: b,
                    logp: p.ln(),
                    prob: *p,
                }),
                [b, c] => binary.push(BinRule {
                    lhs: a,
                    left: b,
                    right: c,
                    logp: p.ln(),
                    prob: *p,
                }),
                _ => unreachable!("binarized rule with arity {}", kids.len()),
            }
        }
        let start = ids.get(&(model.start.clone(), false)).copied();
        let terminals = ids
            .iter()
            .filter(|((_, t), _)| *t)
            .map(|((n, _), &i)| (n.clone(), i))
            .collect();
        let mut by_left = vec![Vec::new(); names.len()];
        for (i, r) in binary.iter().enumerate() {
            by_left[r.left as usize].push(i as u32);
        }
        let introduced = names
            .iter()
            .zip(&terminal)
            .map(|(n, &t)| !t && n.contains(BINARIZE_SEPARATOR))
            .collect();
        ChartParser {
            names,
            introduced,
            terminals,
            start,
            binary,
            by_left,
            unary,
        }
    }

    fn symbols(&self) -> usize {
        self.names.len()
    }

    fn tag_ids<S: AsRef<str>>(&self, tags: &[S]) -> Option<Vec<u32>> {
        tags.iter()
            .map(|t| self.terminals.get(t.as_ref()).copied())
            .collect()
    }

    /// The highest-probability tree over `tags` and its log probability,
    /// or `None` when no tree covers the input.
    pub fn parse<S: AsRef<str>>(&self, tags: &[S]) -> Option<(Tree, f64)> {
        let n = tags.len();
        let start = self.start?;
        if n == 0 {
            return None;
        }
        let ids = self.tag_ids(tags)?;
        let m = self.symbols();
        let idx = |i: usize, j: usize| i * (n + 1) + j;
        let mut chart: Vec<Cell> = (0..(n + 1) * (n + 1))
            .map(|_| Cell {
                score: Vec::new(),
                back: Vec::new(),
            })
            .collect();
        for len in 1..=n {
            for i in 0..=n - len {
                let j = i + len;
                let mut score = vec![f64::NEG_INFINITY; m];
                let mut back = vec![Back::Empty; m];
                if len == 1 {
                    score[ids[i] as usize] = 0.0;
                    back[ids[i] as usize] = Back::Leaf;
                }
                for k in i + 1..j {
                    let (left, right) = (&chart[idx(i, k)], &chart[idx(k, j)]);
                    for (b, &sb) in left.score.iter().enumerate() {
                        if sb == f64::NEG_INFINITY {
                            continue;
                        }
                        for &ri in &self.by_left[b] {
                            let r = &self.binary[ri as usize];
                            let sc = right.score[r.right as usize];
                            if sc == f64::NEG_INFINITY {
                                continue;
                            }
                            let s = r.logp + sb + sc;
                            let a = r.lhs as usize;
                            let cand = Back::Binary(ri, k as u32);
                            if beats(s, score[a])
                                || (ties(s, score[a])
                                    && self.prefer(&chart, n, i, j, a, cand, back[a], &back))
                            {
                                score[a] = s;
                                back[a] = cand;
                            }
                        }
                    }
                }
                // Unary closure by relaxation.
                for _ in 0..=m {
                    let mut changed = false;
                    for (ui, u) in self.unary.iter().enumerate() {
                        let sb = score[u.child as usize];
                        if sb == f64::NEG_INFINITY {
                            continue;
                        }
                        let s = u.logp + sb;
                        let a = u.lhs as usize;
                        let cand = Back::Unary(ui as u32);
                        if beats(s, score[a])
                            || (ties(s, score[a])
                                && back[a] != cand
                                && self.prefer(&chart, n, i, j, a, cand, back[a], &back))
                        {
                            score[a] = s;
                            back[a] = cand;
                            changed = true;
                        }
                    }
                    if !changed {
                        break;
                    }
                }
                chart[idx(i, j)] = Cell { score, back };
            }
        }
        let top = &chart[idx(0, n)];
        let s = top.score[start as usize];
        if s == f64::NEG_INFINITY {
            return None;
        }
        let tree = self.build(&chart, n, 0, n, start as usize, &top.back);
        Some((debinarize(&tree), s))
    }

    /// Whether `cand` renders before `cur` for item `a` over (i, j), where
    /// `back` holds the cell's in-progress backpointers.
    #[allow(clippy::too_many_arguments)]
    fn prefer(
        &self,
        chart: &[Cell],
        n: usize,
        i: usize,
        j: usize,
        a: usize,
        cand: Back,
        cur: Back,
        back: &[Back],
    ) -> bool {
        if cur == Back::Empty {
            return true;
        }
        let mut x = String::new();
        let mut y = String::new();
        let mut guard = 0;
        self.render_back(chart, n, i, j, a, cand, back, &mut x, &mut guard);
        guard = 0;
        self.render_back(chart, n, i, j, a, cur, back, &mut y, &mut guard);
        x.cmp(&y) == Ordering::Less
    }

    /// Renders an item as it will appear after debinarization. An
    /// introduced item renders as its daughters followed by the closing
    /// bracket of the mother it is spliced into.
    #[allow(clippy::too_many_arguments)]
    fn render_back(
        &self,
        chart: &[Cell],
        n: usize,
        i: usize,
        j: usize,
        a: usize,
        how: Back,
        back: &[Back],
        out: &mut String,
        guard: &mut usize,
    ) {
        *guard += 1;
        if *guard > 4 * self.symbols() * (n + 1) {
            // Unary cycle in the in-progress cell; ordering is arbitrary.
            return;
        }
        let idx = |i: usize, j: usize| i * (n + 1) + j;
        let introduced = self.introduced[a];
        if !introduced && how != Back::Leaf {
            out.push('(');
            out.push_str(&self.names[a]);
        }
        let child = |out: &mut String, ci: usize, cj: usize, b: usize, guard: &mut usize| {
            let cell_back = if (ci, cj) == (i, j) {
                back
            } else {
                &chart[idx(ci, cj)].back[..]
            };
            let how = cell_back[b];
            if !self.introduced[b] {
                out.push(' ');
            }
            self.render_back(chart, n, ci, cj, b, how, cell_back, out, guard);
        };
        match how {
            Back::Leaf => out.push_str(&self.names[a]),
            Back::Unary(u) => child(out, i, j, self.unary[u as usize].child as usize, guard),
            Back::Binary(r, k) => {
                let r = &self.binary[r as usize];
                child(out, i, k as usize, r.left as usize, guard);
                child(out, k as usize, j, r.right as usize, guard);
            }
            Back::Empty => {}
        }
        let last = match how {
            Back::Unary(u) => Some(self.unary[u as usize].child),
            Back::Binary(r, _) => Some(self.binary[r as usize].right),
            _ => None,
        };
        if let Some(last) = last {
            if introduced || !self.introduced[last as usize] {
                out.push(')');
            }
        }
    }

    fn build(&self, chart: &[Cell], n: usize, i: usize, j: usize, a: usize, back: &[Back]) -> Tree {
        let idx = |i: usize, j: usize| i * (n + 1) + j;
        match back[a] {
            Back::Leaf => Tree::leaf(self.names[a].clone()),
            Back::Unary(u) => {
                let b = self.unary[u as usize].child as usize;
                Tree::node(
                    self.names[a].clone(),
                    vec![self.build(chart, n, i, j, b, back)],
                )
            }
            Back::Binary(r, k) => {
                let r = &self.binary[r as usize];
                let k = k as usize;
                let l = self.build(chart, n, i, k, r.left as usize, &chart[idx(i, k)].back);
                let rt = self.build(chart, n, k, j, r.right as usize, &chart[idx(k, j)].back);
                Tree::node(self.names[a].clone(), vec![l, rt])
            }
            Back::Empty => unreachable!("backpointer to an empty item"),
        }
    }

    /// Total probability of all trees over `tags`.
    pub fn inside<S: AsRef<str>>(&self, tags: &[S]) -> f64 {
        let n = tags.len();
        let (Some(start), Some(ids)) = (self.start, self.tag_ids(tags)) else {
            return 0.0;
        };
        if n == 0 {
            return 0.0;
        }
        let m = self.symbols();
        let idx = |i: usize, j: usize| i * (n + 1) + j;
        let mut chart: Vec<Vec<f64>> = vec![Vec::new(); (n + 1) * (n + 1)];
        for len in 1..=n {
            for i in 0..=n - len {
                let j = i + len;
                let mut base = vec![0.0; m];
                if len == 1 {
                    base[ids[i] as usize] = 1.0;
                }
                for k in i + 1..j {
                    let (left, right) = (&chart[idx(i, k)], &chart[idx(k, j)]);
                    for r in &self.binary {
                        let p = left[r.left as usize] * right[r.right as usize];
                        if p > 0.0 {
                            base[r.lhs as usize] += r.prob * p;
                        }
                    }
                }
                let mut cur = base.clone();
                for _ in 0..1000 {
                    let mut next = base.clone();
                    for u in &self.unary {
                        next[u.lhs as usize] += u.prob * cur[u.child as usize];
                    }
                    let diff = next
                        .iter()
                        .zip(&cur)
                        .map(|(a, b)| (a - b).abs() / a.abs().max(f64::MIN_POSITIVE))
                        .fold(0.0, f64::max);
                    cur = next;
                    if diff < 1e-15 {
                        break;
                    }
                }
                chart[idx(i, j)] = cur;
            }
        }
        chart[idx(0, n)][start as usize]
    }
}

/// Viterbi parse of a tag sequence.
pub fn viterbi_parse<S: AsRef<str>>(tags: &[S], model: &PcfgModel) -> Option<(Tree, f64)> {
    ChartParser::new(model).parse(tags)
}

/// Inside probability of a tag sequence; 0 when nothing covers it.
pub fn sentence_probability<S: AsRef<str>>(tags: &[S], model: &PcfgModel) -> f64 {
    ChartParser::new(model).inside(tags)
}

/// Every tree over `tags` with its probability, best first, by direct
/// recursion over the unbinarized rules.
pub fn enumerate_parses<S: AsRef<str>>(
    tags: &[S],
    model: &PcfgModel,
    limit: usize,
) -> Result<Vec<(Tree, f64)>> {
    let tags: Vec<&str> = tags.iter().map(AsRef::as_ref).collect();
    if tags.is_empty() {
        return Ok(Vec::new());
    }
    let mut by_lhs: BTreeMap<&str, Vec<(&Rule, f64)>> = BTreeMap::new();
    for (r, p) in model.weighted_rules() {
        if p > 0.0 {
            by_lhs.entry(&r.lhs).or_default().push((r, p));
        }
    }
    let mut e = Enumerator {
        tags: &tags,
        by_lhs,
        memo: HashMap::new(),
        active: HashSet::new(),
        limit,
    };
    let mut out = e.items(&model.start, 0, tags.len())?.as_ref().clone();
    out.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| a.0.to_string().cmp(&b.0.to_string()))
    });
    Ok(out)
}

type Items = std::rc::Rc<Vec<(Tree, f64)>>;

struct Enumerator<'a> {
    tags: &'a [&'a str],
    by_lhs: BTreeMap<&'a str, Vec<(&'a Rule, f64)>>,
    memo: HashMap<(&'a str, usize, usize), Items>,
    active: HashSet<(&'a str, usize, usize)>,
    limit: usize,
}

impl<'a> Enumerator<'a> {
    fn items(&mut self, sym: &'a str, i: usize, j: usize) -> Result<Items> {
        let key = (sym, i, j);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let Some(rules) = self.by_lhs.get(sym).cloned() else {
            let v = if j == i + 1 && self.tags[i] == sym {
                vec![(Tree::leaf(sym), 1.0)]
            } else {
                Vec::new()
            };
            let v = Items::new(v);
            self.memo.insert(key, v.clone());
            return Ok(v);
        };
        if !self.active.insert(key) {
            return Err(Error::Unbounded(sym.to_string()));
        }
        let mut out = Vec::new();
        for (rule, p) in rules {
            if rule.arity() > j - i {
                continue;
            }
            let partial: Vec<(Vec<Tree>, f64)> = vec![(Vec::new(), p)];
            self.expand(rule, 0, i, j, &partial, &mut out)?;
        }
        self.active.remove(&key);
        let v = Items::new(out);
        self.memo.insert(key, v.clone());
        Ok(v)
    }

    /// Extends each partial daughter sequence with daughter `d` of `rule`
    /// starting at `from`, completing trees into `out` at the last daughter.
    fn expand(
        &mut self,
        rule: &'a Rule,
        d: usize,
        from: usize,
        j: usize,
        partial: &[(Vec<Tree>, f64)],
        out: &mut Vec<(Tree, f64)>,
    ) -> Result<()> {
        let remaining = rule.arity() - d - 1;
        let ends: Vec<usize> = if remaining == 0 {
            vec![j]
        } else {
            (from + 1..=j - remaining).collect()
        };
        for end in ends {
            let kids = self.items(&rule.rhs[d], from, end)?;
            if kids.is_empty() {
                continue;
            }
            let mut next = Vec::new();
            for (seq, p) in partial.iter() {
                for (k, q) in kids.iter() {
                    let mut s = seq.clone();
                    s.push(k.clone());
                    next.push((s, p * q));
                    if next.len() > self.limit {
                        return Err(Error::LimitExceeded(self.limit));
                    }
                }
            }
            if remaining == 0 {
                for (seq, p) in next {
                    out.push((Tree::node(rule.lhs.clone(), seq), p));
                    if out.len() > self.limit {
                        return Err(Error::LimitExceeded(self.limit));
                    }
                }
            } else {
                self.expand(rule, d + 1, end, j, &next, out)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::read_trees;

    fn model(rules: &[(&str, &[&str], u64)], start: &str) -> PcfgModel {
        let mut m = PcfgModel::new(start);
        for (lhs, rhs, c) in rules {
            m.add_rule(Rule::new(*lhs, rhs.iter().copied()), *c);
        }
        m
    }

    fn pp_grammar() -> PcfgModel {
        model(
            &[
                ("S", &["NP", "VP"], 1),
                ("VP", &["V", "NP"], 6),
                ("VP", &["V", "NP", "PP"], 4),
                ("NP", &["NP", "PP"], 3),
                ("NP", &["D", "N"], 7),
                ("PP", &["P", "NP"], 1),
            ],
            "S",
        )
    }

    const SENT: [&str; 8] = ["D", "N", "V", "D", "N", "P", "D", "N"];

    #[test]
    fn deterministic_grammar() {
        let m = model(&[("ROOT", &["S"], 1), ("S", &["NN"], 1)], "ROOT");
        let (t, lp) = viterbi_parse(&["NN"], &m).unwrap();
        assert_eq!(t.to_string(), "(ROOT (S NN))");
        assert_eq!(lp, 0.0);
        assert_eq!(sentence_probability(&["NN"], &m), 1.0);
    }

    #[test]
    fn pp_attachment_matches_enumeration() {
        let m = pp_grammar();
        let all = enumerate_parses(&SENT, &m, 100).unwrap();
        assert_eq!(all.len(), 2);
        let (t, lp) = viterbi_parse(&SENT, &m).unwrap();
        assert_eq!(t, all[0].0);
        assert!((lp - all[0].1.ln()).abs() < 1e-12);
        assert!((lp - m.log_prob_tree(&t)).abs() < 1e-12);
        // VP -> V NP PP: .4 * .7^3 vs VP -> V NP, NP -> NP PP: .6 * .3 * .7^3
        assert!(t.to_string().contains("(VP V (NP D N) (PP"));
        let total: f64 = all.iter().map(|(_, p)| p).sum();
        assert!((sentence_probability(&SENT, &m) - total).abs() < 1e-12);
    }

    #[test]
    fn uncovered_tags() {
        let m = pp_grammar();
        assert!(viterbi_parse(&["D", "X"], &m).is_none());
        assert_eq!(sentence_probability(&["D", "X"], &m), 0.0);
        assert!(enumerate_parses(&["D", "X"], &m, 10).unwrap().is_empty());
        assert!(viterbi_parse(&["V"], &m).is_none());
    }

    #[test]
    fn unary_chains_and_cycles() {
        let m = model(
            &[
                ("S", &["A"], 1),
                ("S", &["B"], 1),
                ("A", &["x"], 1),
                ("B", &["A"], 1),
            ],
            "S",
        );
        let all = enumerate_parses(&["x"], &m, 10).unwrap();
        assert_eq!(all.len(), 2);
        let (t, lp) = viterbi_parse(&["x"], &m).unwrap();
        assert_eq!(t.to_string(), "(S (A x))");
        assert!((lp - 0.5f64.ln()).abs() < 1e-12);
        assert!((sentence_probability(&["x"], &m) - 1.0).abs() < 1e-12);

        let cyclic = model(&[("S", &["A"], 1), ("A", &["S"], 1), ("A", &["x"], 1)], "S");
        assert!(matches!(
            enumerate_parses(&["x"], &cyclic, 10),
            Err(Error::Unbounded(_))
        ));
        let (t, _) = viterbi_parse(&["x"], &cyclic).unwrap();
        assert_eq!(t.to_string(), "(S (A x))");
        assert!((sentence_probability(&["x"], &cyclic) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn enumeration_limit() {
        let m = model(&[("S", &["S", "S"], 1), ("S", &["a"], 1)], "S");
        let tags = ["a"; 7];
        // Catalan(6) = 132 bracketings.
        assert_eq!(enumerate_parses(&tags, &m, 1000).unwrap().len(), 132);
        assert!(matches!(
            enumerate_parses(&tags, &m, 50),
            Err(Error::LimitExceeded(50))
        ));
    }

    #[test]
    fn ties_break_towards_the_smaller_rendering() {
        let m = model(&[("S", &["S", "S"], 1), ("S", &["a"], 1)], "S");
        let (t, _) = viterbi_parse(&["a", "a", "a"], &m).unwrap();
        assert_eq!(t.to_string(), "(S (S (S a) (S a)) (S a))");
    }

    #[test]
    fn nary_output_from_corpus() {
        let corpus = read_trees("(ROOT (S (NP DT JJ NN) (VP VB (NP DT NN))))").unwrap();
        let m = PcfgModel::induce(&corpus).unwrap();
        let (t, lp) = viterbi_parse(&["DT", "JJ", "NN", "VB", "DT", "NN"], &m).unwrap();
        assert_eq!(t, corpus[0]);
        assert!((lp - 0.25f64.ln()).abs() < 1e-12);
    }
}
