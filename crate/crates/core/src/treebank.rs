//! Reading, writing and normalizing bracketed treebank files.
//!
//! The reader accepts Penn-style bracketing: `(LABEL child ...)` where a
//! child is either a bare token (a terminal) or another bracketed
//! expression. Each tree may be wrapped in an unlabelled outer bracket,
//! `( (S ...) )`. Whitespace, including newlines, is insignificant.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::tree::Tree;

/// Preterminal label marking an empty category (trace, null element).
pub const EMPTY_MARKER: &str = "-NONE-";
/// Label of the artificial root added during preprocessing.
pub const ROOT_LABEL: &str = "ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnaryMode {
    #[default]
    Keep,
    /// Delete the mother of a unary branch, hoisting the daughter.
    FoldUp,
    /// Delete the daughter of a unary branch; the mother takes over its children.
    FoldDown,
}

impl std::str::FromStr for UnaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "keep" => Ok(UnaryMode::Keep),
            "fold_up" | "fold-up" | "up" => Ok(UnaryMode::FoldUp),
            "fold_down" | "fold-down" | "down" => Ok(UnaryMode::FoldDown),
            other => Err(Error::InvalidArgument(format!(
                "unknown unary mode `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessOptions {
    pub add_root: bool,
    pub strip_empties: bool,
    pub strip_function_tags: bool,
    pub unary_mode: UnaryMode,
    /// Characters that start a function tag or index suffix.
    pub tag_delimiters: String,
}

impl Default for PreprocessOptions {
    /// Everything off: preprocessing is the identity.
    fn default() -> Self {
        PreprocessOptions {
            add_root: false,
            strip_empties: false,
            strip_function_tags: false,
            unary_mode: UnaryMode::Keep,
            tag_delimiters: "-=".to_string(),
        }
    }
}

impl PreprocessOptions {
    /// The standard training pipeline: root added, empties and function
    /// tags removed, unaries kept.
    pub fn standard() -> Self {
        PreprocessOptions {
            add_root: true,
            strip_empties: true,
            strip_function_tags: true,
            ..Default::default()
        }
    }
}

// ---------------------------------------------------------------------------
// Reading

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    base: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Option<(usize, Token<'a>)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= bytes.len() {
            return None;
        }
        let start = self.pos;
        let tok = match bytes[self.pos] {
            b'(' => {
                self.pos += 1;
                Token::Open
            }
            b')' => {
                self.pos += 1;
                Token::Close
            }
            _ => {
                while self.pos < bytes.len()
                    && !bytes[self.pos].is_ascii_whitespace()
                    && bytes[self.pos] != b'('
                    && bytes[self.pos] != b')'
                {
                    self.pos += 1;
                }
                Token::Atom(&self.src[start..self.pos])
            }
        };
        Some((self.base + start, tok))
    }

    fn end_offset(&self) -> usize {
        self.base + self.src.len()
    }
}

enum Item {
    Tree(Tree),
    /// An unlabelled bracket around exactly one tree.
    Wrapper(Tree),
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        offset,
        message: message.into(),
    }
}

/// Parses the body of a bracketed expression; the opening bracket at
/// `open_at` has already been consumed.
fn parse_bracket(lex: &mut Lexer<'_>, open_at: usize) -> Result<Item> {
    let mut label: Option<String> = None;
    let mut children = Vec::new();
    let mut first = true;
    loop {
        let Some((off, tok)) = lex.next() else {
            return Err(syntax(
                lex.end_offset(),
                "unexpected end of input; unbalanced brackets",
            ));
        };
        match tok {
            Token::Close => break,
            Token::Atom(a) if first => label = Some(a.to_string()),
            Token::Atom(a) => children.push(Tree::leaf(a)),
            Token::Open => match parse_bracket(lex, off)? {
                Item::Tree(t) => children.push(t),
                Item::Wrapper(_) => return Err(syntax(off, "empty label on inner node")),
            },
        }
        first = false;
    }
    match label {
        Some(l) => Ok(Item::Tree(Tree::node(l, children))),
        None if children.len() == 1 && !children[0].is_leaf() => {
            Ok(Item::Wrapper(children.pop().unwrap()))
        }
        None => Err(syntax(open_at, "empty label")),
    }
}

/// Reads every tree in `source`, in document order.
pub fn read_trees(source: &str) -> Result<Vec<Tree>> {
    read_trees_at(source, 0)
}

fn read_trees_at(source: &str, base: usize) -> Result<Vec<Tree>> {
    let mut lex = Lexer {
        src: source,
        pos: 0,
        base,
    };
    let mut out = Vec::new();
    while let Some((off, tok)) = lex.next() {
        match tok {
            Token::Open => match parse_bracket(&mut lex, off)? {
                Item::Tree(t) | Item::Wrapper(t) => out.push(t),
            },
            Token::Close => return Err(syntax(off, "unmatched `)`")),
            Token::Atom(a) => return Err(syntax(off, format!("expected `(`, found `{a}`"))),
        }
    }
    Ok(out)
}

/// Streaming reader yielding one tree per top-level bracketed expression.
pub struct TreeReader<R> {
    inner: R,
    buf: String,
    /// Byte offset in the stream of `buf[0]`.
    base: usize,
    depth: usize,
    scanned: usize,
    pending: std::collections::VecDeque<Tree>,
    done: bool,
}

impl<R: BufRead> TreeReader<R> {
    pub fn new(inner: R) -> Self {
        TreeReader {
            inner,
            buf: String::new(),
            base: 0,
            depth: 0,
            scanned: 0,
            pending: Default::default(),
            done: false,
        }
    }

    /// Scans newly buffered bytes; returns the end of the last complete
    /// top-level expression, if any.
    fn scan(&mut self) -> Result<Option<usize>> {
        let mut complete = None;
        let bytes = self.buf.as_bytes();
        for (i, &b) in bytes.iter().enumerate().skip(self.scanned) {
            match b {
                b'(' => self.depth += 1,
                b')' => {
                    if self.depth == 0 {
                        return Err(syntax(self.base + i, "unmatched `)`"));
                    }
                    self.depth -= 1;
                    if self.depth == 0 {
                        complete = Some(i + 1);
                    }
                }
                _ => {}
            }
        }
        self.scanned = bytes.len();
        Ok(complete)
    }
}

impl<R: BufRead> Iterator for TreeReader<R> {
    type Item = Result<Tree>;

    fn next(&mut self) -> Option<Result<Tree>> {
        loop {
            if let Some(t) = self.pending.pop_front() {
                return Some(Ok(t));
            }
            if self.done {
                return None;
            }
            let mut line = String::new();
            match self.inner.read_line(&mut line) {
                Ok(0) => {
                    self.done = true;
                    let rest = std::mem::take(&mut self.buf);
                    if rest.trim().is_empty() {
                        return None;
                    }
                    match read_trees_at(&rest, self.base) {
                        Ok(ts) => {
                            self.pending.extend(ts);
                            continue;
                        }
                        Err(e) => return Some(Err(e)),
                    }
                }
                Ok(_) => self.buf.push_str(&line),
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
            }
            match self.scan() {
                Ok(Some(end)) => {
                    let chunk: String = self.buf[..end].to_string();
                    match read_trees_at(&chunk, self.base) {
                        Ok(ts) => self.pending.extend(ts),
                        Err(e) => {
                            self.done = true;
                            return Some(Err(e));
                        }
                    }
                    self.buf.drain(..end);
                    self.base += end;
                    // Depth is zero at `end`; rescan whatever followed it.
                    self.depth = 0;
                    self.scanned = 0;
                    if let Err(e) = self.scan() {
                        self.done = true;
                        return Some(Err(e));
                    }
                }
                Ok(None) => {}
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Writing

/// Writes each tree in canonical single-line form, one per line.
pub fn write_trees<W: Write>(trees: &[Tree], mut sink: W) -> Result<()> {
    for t in trees {
        writeln!(sink, "{t}")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Preprocessing

/// Truncates a nonterminal label at its first function-tag delimiter.
/// Labels that begin with a delimiter (`-NONE-`, `-LRB-`) are left alone.
pub fn strip_function_tag<'a>(label: &'a str, delimiters: &str) -> &'a str {
    if label.starts_with(|c| delimiters.contains(c)) {
        return label;
    }
    match label.find(|c| delimiters.contains(c)) {
        Some(i) if i > 0 => &label[..i],
        _ => label,
    }
}

fn strip_tags_rec(t: &Tree, delims: &str) -> Tree {
    if t.is_leaf() {
        return t.clone();
    }
    Tree::node(
        strip_function_tag(&t.label, delims),
        t.children
            .iter()
            .map(|c| strip_tags_rec(c, delims))
            .collect(),
    )
}

/// Removes empty-category preterminals and every node left dominating
/// no pronounced words. `None` if nothing is left.
pub fn strip_empties(t: &Tree) -> Option<Tree> {
    if t.is_leaf() {
        return Some(t.clone());
    }
    if t.is_preterminal() {
        return (t.label != EMPTY_MARKER).then(|| t.clone());
    }
    let children: Vec<Tree> = t.children.iter().filter_map(strip_empties).collect();
    if children.is_empty() {
        None
    } else {
        Some(Tree::node(t.label.clone(), children))
    }
}

fn fold_rec(t: &Tree, mode: UnaryMode) -> Tree {
    if t.is_leaf() {
        return t.clone();
    }
    let children: Vec<Tree> = t.children.iter().map(|c| fold_rec(c, mode)).collect();
    if children.len() == 1 && !children[0].is_leaf() {
        let child = children.into_iter().next().unwrap();
        return match mode {
            UnaryMode::FoldUp => child,
            UnaryMode::FoldDown => Tree::node(t.label.clone(), child.children),
            UnaryMode::Keep => Tree::node(t.label.clone(), vec![child]),
        };
    }
    Tree::node(t.label.clone(), children)
}

/// Eliminates unary branches `A -> B` (B a category, not a word) to a
/// fixpoint. A root labelled `root_label` keeps its unary branch.
pub fn fold_unaries(t: &Tree, mode: UnaryMode, root_label: &str) -> Tree {
    if mode == UnaryMode::Keep {
        return t.clone();
    }
    if t.label == root_label && t.children.len() == 1 && !t.children[0].is_leaf() {
        return Tree::node(t.label.clone(), vec![fold_rec(&t.children[0], mode)]);
    }
    fold_rec(t, mode)
}

/// Applies function-tag stripping, empty removal, root insertion and
/// unary folding, in that order.
pub fn preprocess(t: &Tree, opts: &PreprocessOptions) -> Result<Tree> {
    let mut t = if opts.strip_function_tags {
        strip_tags_rec(t, &opts.tag_delimiters)
    } else {
        t.clone()
    };
    if opts.strip_empties {
        t = strip_empties(&t).ok_or(Error::VacuousTree)?;
    }
    if opts.add_root && t.label != ROOT_LABEL {
        t = Tree::node(ROOT_LABEL, vec![t]);
    }
    Ok(fold_unaries(&t, opts.unary_mode, ROOT_LABEL))
}

/// Preprocesses a corpus, dropping vacuous trees. Returns the kept trees
/// and the number dropped.
pub fn preprocess_corpus(trees: &[Tree], opts: &PreprocessOptions) -> (Vec<Tree>, usize) {
    let mut kept = Vec::with_capacity(trees.len());
    let mut dropped = 0;
    for t in trees {
        match preprocess(t, opts) {
            Ok(p) => kept.push(p),
            Err(_) => dropped += 1,
        }
    }
    (kept, dropped)
}

/// Left-to-right preterminal labels.
pub fn pos_yield(t: &Tree) -> Vec<&str> {
    let mut out = Vec::new();
    t.walk(&mut |n| {
        if n.is_preterminal() {
            out.push(n.label.as_str());
        }
    });
    out
}

/// True if every node is a leaf, a preterminal, or an internal node
/// whose children are all non-leaves, and all labels are non-empty.
pub fn is_treebank_shaped(t: &Tree) -> bool {
    if t.label.is_empty() {
        return false;
    }
    if t.is_leaf() || t.is_preterminal() {
        return true;
    }
    t.children
        .iter()
        .all(|c| !c.is_leaf() && is_treebank_shaped(c))
}
