//! Labelled ordered trees.
//!
//! A [`Tree`] with no children is a terminal leaf (a word, or a tag when
//! working at the part-of-speech level). A node whose only child is a leaf
//! is a preterminal.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tree {
    pub label: String,
    pub children: Vec<Tree>,
}

impl Tree {
    pub fn leaf(label: impl Into<String>) -> Self {
        Tree {
            label: label.into(),
            children: Vec::new(),
        }
    }

    pub fn node(label: impl Into<String>, children: Vec<Tree>) -> Self {
        Tree {
            label: label.into(),
            children,
        }
    }

    /// Preterminal `(tag word)`.
    pub fn preterminal(tag: impl Into<String>, word: impl Into<String>) -> Self {
        Tree::node(tag, vec![Tree::leaf(word)])
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn is_preterminal(&self) -> bool {
        self.children.len() == 1 && self.children[0].is_leaf()
    }

    /// Terminal yield, left to right.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        if self.is_leaf() {
            out.push(&self.label);
        } else {
            for c in &self.children {
                c.collect_leaves(out);
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        if self.is_leaf() {
            1
        } else {
            self.children.iter().map(Tree::leaf_count).sum()
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(Tree::depth).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Tree::node_count).sum::<usize>()
    }

    /// Replaces every preterminal `(T w)` by the leaf `T`, giving the
    /// tag-level tree the parsers work on.
    pub fn delexicalize(&self) -> Tree {
        if self.is_preterminal() || self.is_leaf() {
            return Tree::leaf(self.label.clone());
        }
        Tree::node(
            self.label.clone(),
            self.children.iter().map(Tree::delexicalize).collect(),
        )
    }

    /// Inverse of [`Tree::delexicalize`]: each leaf `T` at position `i`
    /// becomes `(T words[i])`. Returns `None` if the number of words does
    /// not match the number of leaves.
    pub fn relexicalize<S: AsRef<str>>(&self, words: &[S]) -> Option<Tree> {
        if words.len() != self.leaf_count() {
            return None;
        }
        let mut pos = 0;
        Some(self.relex_at(words, &mut pos))
    }

    fn relex_at<S: AsRef<str>>(&self, words: &[S], pos: &mut usize) -> Tree {
        if self.is_leaf() {
            let w = words[*pos].as_ref().to_string();
            *pos += 1;
            return Tree::preterminal(self.label.clone(), w);
        }
        Tree::node(
            self.label.clone(),
            self.children
                .iter()
                .map(|c| c.relex_at(words, pos))
                .collect(),
        )
    }

    /// Pre-order visit of every node.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Tree)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }
}

impl fmt::Display for Tree {
    /// Canonical single-line bracketed form: `(LABEL child ...)`, leaves bare.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_leaf() {
            return f.write_str(&self.label);
        }
        write!(f, "({}", self.label)?;
        for c in &self.children {
            write!(f, " {c}")?;
        }
        f.write_str(")")
    }
}
