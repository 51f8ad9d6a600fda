//! Seeded synthetic trees and corpora.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tree::Tree;

/// Shape limits for random tag-level trees.
#[derive(Debug, Clone)]
pub struct TreeShape {
    pub max_depth: usize,
    pub max_branching: usize,
    /// Chance that a node below the root is a leaf.
    pub leaf_prob: f64,
    /// The first nonterminal labels every root.
    pub nonterminals: Vec<String>,
    pub tags: Vec<String>,
}

impl TreeShape {
    pub fn new(
        max_depth: usize,
        max_branching: usize,
        nonterminals: &[&str],
        tags: &[&str],
    ) -> Self {
        TreeShape {
            max_depth,
            max_branching,
            leaf_prob: 0.4,
            nonterminals: nonterminals.iter().map(|s| s.to_string()).collect(),
            tags: tags.iter().map(|s| s.to_string()).collect(),
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random tag-level tree of depth at most `shape.max_depth` (leaves
/// included, at least 2). A unary branch only leads to a tag or to a later
/// nonterminal, so the rules of any such corpus have no unary cycles.
pub fn random_tree<R: Rng>(rng: &mut R, shape: &TreeShape) -> Tree {
    grow(rng, shape, 0, 0)
}

fn grow<R: Rng>(rng: &mut R, shape: &TreeShape, label: usize, depth: usize) -> Tree {
    let name = shape.nonterminals[label].clone();
    let n = rng.gen_range(1..=shape.max_branching.max(1));
    let children = (0..n)
        .map(|_| {
            let leaf = depth + 3 > shape.max_depth || rng.gen_bool(shape.leaf_prob);
            if leaf {
                return Tree::leaf(shape.tags.choose(rng).unwrap().clone());
            }
            let lo = if n == 1 { label + 1 } else { 0 };
            if lo >= shape.nonterminals.len() {
                return Tree::leaf(shape.tags.choose(rng).unwrap().clone());
            }
            let child = rng.gen_range(lo..shape.nonterminals.len());
            grow(rng, shape, child, depth + 1)
        })
        .collect();
    Tree::node(name, children)
}

pub fn random_corpus(seed: u64, n: usize, shape: &TreeShape) -> Vec<Tree> {
    let mut r = rng(seed);
    (0..n).map(|_| random_tree(&mut r, shape)).collect()
}

/// A right-branching chain `(S x (S x ... (S x x)))` over `n` tags.
pub fn right_chain(n: usize) -> Tree {
    let mut t = Tree::leaf("x");
    for _ in 1..n {
        t = Tree::node("S", vec![Tree::leaf("x"), t]);
    }
    if n == 1 {
        t = Tree::node("S", vec![t]);
    }
    t
}

/// A left-branching chain `(S (S ... (S x x) ...) x)` over `n` tags.
pub fn left_chain(n: usize) -> Tree {
    let mut t = Tree::leaf("x");
    for _ in 1..n {
        t = Tree::node("S", vec![t, Tree::leaf("x")]);
    }
    if n == 1 {
        t = Tree::node("S", vec![t]);
    }
    t
}

fn pick<'a, R: Rng>(rng: &mut R, words: &[&'a str]) -> &'a str {
    words.choose(rng).unwrap()
}

fn pt<R: Rng>(rng: &mut R, tag: &str, words: &[&str]) -> Tree {
    Tree::preterminal(tag, pick(rng, words))
}

const DETS: &[&str] = &["the", "a", "every", "this"];
const NOUNS: &[&str] = &[
    "dog",
    "man",
    "telescope",
    "park",
    "report",
    "market",
    "city",
    "idea",
];
const ADJS: &[&str] = &["big", "old", "new", "red"];
const PRONS: &[&str] = &["he", "she", "they", "it"];
const NAMES: &[&str] = &["Smith", "Jones", "Paris", "Acme"];
const VERBS: &[&str] = &["saw", "liked", "sold", "found", "watched"];
const INTRANS: &[&str] = &["slept", "left", "rose", "fell"];
const PREPS: &[&str] = &["with", "in", "near", "of"];
const CONTROL: &[&str] = &["wanted", "tried", "hoped"];

struct English<'r, R> {
    rng: &'r mut R,
    traces: usize,
}

impl<R: Rng> English<'_, R> {
    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn bare_np(&mut self) -> Tree {
        let mut kids = vec![pt(self.rng, "DT", DETS)];
        if self.chance(0.3) {
            kids.push(pt(self.rng, "JJ", ADJS));
        }
        kids.push(pt(self.rng, "NN", NOUNS));
        Tree::node("NP", kids)
    }

    /// Subjects favour pronouns and names.
    fn subject(&mut self) -> Tree {
        let x: f64 = self.rng.gen();
        if x < 0.55 {
            Tree::node("NP-SBJ", vec![pt(self.rng, "PRP", PRONS)])
        } else if x < 0.8 {
            Tree::node("NP-SBJ", vec![pt(self.rng, "NNP", NAMES)])
        } else {
            let mut t = self.bare_np();
            t.label = "NP-SBJ".into();
            t
        }
    }

    /// Objects favour full noun phrases, often with a modifier.
    fn object(&mut self, depth: usize) -> Tree {
        let x: f64 = self.rng.gen();
        if x < 0.08 {
            Tree::node("NP", vec![pt(self.rng, "PRP", PRONS)])
        } else if x < 0.15 {
            Tree::node("NP", vec![pt(self.rng, "NNP", NAMES)])
        } else if x < 0.45 && depth < 2 {
            let np = self.bare_np();
            let pp = self.pp(depth + 1);
            Tree::node("NP", vec![np, pp])
        } else {
            self.bare_np()
        }
    }

    fn pp(&mut self, depth: usize) -> Tree {
        let p = pt(self.rng, "IN", PREPS);
        let np = self.object(depth);
        Tree::node("PP", vec![p, np])
    }

    fn vp(&mut self, depth: usize) -> Tree {
        let x: f64 = self.rng.gen();
        if x < 0.2 {
            return Tree::node("VP", vec![pt(self.rng, "VBD", INTRANS)]);
        }
        if x < 0.32 && depth == 0 {
            self.traces += 1;
            let trace = Tree::node(
                "NP-SBJ",
                vec![Tree::preterminal("-NONE-", format!("*-{}", self.traces))],
            );
            let inner = Tree::node(
                "VP",
                vec![
                    Tree::preterminal("TO", "to"),
                    Tree::node("VP", vec![pt(self.rng, "VB", &["leave", "win", "sleep"])]),
                ],
            );
            return Tree::node(
                "VP",
                vec![
                    pt(self.rng, "VBD", CONTROL),
                    Tree::node("S", vec![trace, inner]),
                ],
            );
        }
        let mut kids = vec![pt(self.rng, "VBD", VERBS), self.object(depth)];
        if self.chance(0.3) {
            kids.push(self.pp(depth + 1));
        }
        Tree::node("VP", kids)
    }

    fn sentence(&mut self) -> Tree {
        let subj = self.subject();
        let vp = self.vp(0);
        let mut kids = vec![subj, vp];
        if self.chance(0.8) {
            kids.push(Tree::preterminal(".", "."));
        }
        Tree::node("S", kids)
    }
}

/// Penn-style word-level trees from a small English-like grammar whose noun
/// phrase expansions depend on position: subjects are mostly pronouns and
/// names, objects mostly determiner phrases with prepositional modifiers.
/// Subjects carry a function tag and some sentences contain empty subjects.
pub fn english_corpus(seed: u64, n: usize) -> Vec<Tree> {
    let mut r = rng(seed);
    let mut g = English {
        rng: &mut r,
        traces: 0,
    };
    (0..n).map(|_| g.sentence()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::Rule;
    use crate::treebank::{is_treebank_shaped, preprocess, PreprocessOptions};

    #[test]
    fn random_trees_respect_shape() {
        let shape = TreeShape::new(8, 4, &["S", "A", "B"], &["x", "y"]);
        for t in random_corpus(7, 300, &shape) {
            assert!(t.depth() <= 8);
            assert_eq!(t.label, "S");
            t.walk(&mut |n| {
                assert!(n.children.len() <= 4);
                if let [c] = n.children.as_slice() {
                    if !c.is_leaf() {
                        let pos = |l: &str| shape.nonterminals.iter().position(|x| x == l).unwrap();
                        assert!(pos(&c.label) > pos(&n.label), "{}", Rule::of_node(n));
                    }
                }
            });
        }
    }

    #[test]
    fn corpora_are_reproducible() {
        let shape = TreeShape::new(5, 3, &["S", "A"], &["x"]);
        assert_eq!(random_corpus(3, 20, &shape), random_corpus(3, 20, &shape));
        assert_eq!(english_corpus(3, 20), english_corpus(3, 20));
        assert_ne!(english_corpus(3, 20), english_corpus(4, 20));
    }

    #[test]
    fn english_corpus_is_treebank_shaped() {
        let trees = english_corpus(11, 200);
        let text: String = trees.iter().map(|t| t.to_string()).collect();
        assert!(text.contains("NP-SBJ"));
        assert!(text.contains("-NONE-"));
        for t in &trees {
            assert!(is_treebank_shaped(t));
            let p = preprocess(t, &PreprocessOptions::standard()).unwrap();
            assert_eq!(p.label, "ROOT");
            assert!(!p.to_string().contains("-NONE-"));
        }
    }

    #[test]
    fn chains() {
        assert_eq!(right_chain(3).to_string(), "(S x (S x x))");
        assert_eq!(left_chain(3).to_string(), "(S (S x x) x)");
        assert_eq!(right_chain(1).leaf_count(), 1);
    }
}
