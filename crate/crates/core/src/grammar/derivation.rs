//! Left-corner derivations of trees and the stack machine that replays them.
//!
//! The machine keeps a stack of found constituents and sought goals. It
//! starts with the start category sought. When a goal is on top the next
//! terminal must be shifted; otherwise the found left corner either
//! attaches to the goal beneath it (when the categories match) or projects
//! a rule whose first daughter it is, pushing goals for the remaining
//! daughters.
//!
//! Under [`Composition::Immediate`] the attachment of a projected
//! category to a matching goal is decided when the rule is projected
//! rather than after the category is complete, which keeps the stack
//! bounded on both left- and right-branching structure.

use std::fmt;

use super::Rule;
use crate::error::{Error, Result};
use crate::tree::Tree;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LcMove {
    Shift(String),
    /// Project `rule` from the found left corner. `compose` marks that the
    /// new mother immediately fills the goal beneath it.
    Project {
        rule: Rule,
        compose: bool,
    },
    Attach,
}

impl fmt::Display for LcMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LcMove::Shift(w) => write!(f, "shift {w}"),
            LcMove::Project {
                rule,
                compose: false,
            } => write!(f, "project {rule}"),
            LcMove::Project {
                rule,
                compose: true,
            } => write!(f, "project+attach {rule}"),
            LcMove::Attach => f.write_str("attach"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Composition {
    /// Attach only once a constituent is complete.
    #[default]
    Delayed,
    /// Decide attachment at projection time (stack composition).
    Immediate,
}

/// The unique left-corner derivation of `t`, taking the root label as
/// the start goal.
pub fn lc_derivation(t: &Tree, composition: Composition) -> Vec<LcMove> {
    let mut out = Vec::new();
    derive_goal(t, composition, &mut out);
    out
}

fn derive_goal(goal: &Tree, composition: Composition, out: &mut Vec<LcMove>) {
    let mut spine = vec![goal];
    while let Some(first) = spine.last().unwrap().children.first() {
        spine.push(first);
    }
    out.push(LcMove::Shift(spine.last().unwrap().label.clone()));
    let internal = spine.len() - 1;
    for i in (0..internal).rev() {
        let node = spine[i];
        out.push(LcMove::Project {
            rule: Rule::of_node(node),
            compose: composition == Composition::Immediate && i == 0,
        });
        for c in &node.children[1..] {
            derive_goal(c, composition, out);
        }
    }
    if composition == Composition::Delayed || internal == 0 {
        out.push(LcMove::Attach);
    }
}

/// One move of a replayed derivation, with the context that conditions
/// its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub index: usize,
    /// Stack length before the move.
    pub stack_len: usize,
    /// Stack length after minus before.
    pub delta: i32,
    pub kind: StepKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepKind {
    Shift {
        lc: String,
        gc: String,
    },
    Attach {
        lc: String,
        gc: String,
    },
    Project {
        lc: String,
        gc: String,
        rule: Rule,
        compose: bool,
        /// Whether the left corner could still attach (a shifted terminal,
        /// or any constituent when composition is delayed).
        attachable: bool,
    },
}

impl Step {
    /// Entries beneath the left corner at a decision point.
    pub fn stack_size(&self) -> usize {
        self.stack_len.saturating_sub(1)
    }

    pub fn is_shift(&self) -> bool {
        matches!(self.kind, StepKind::Shift { .. })
    }
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    Root,
    Child(usize, usize),
}

enum Entry {
    Found { node: usize, attachable: bool },
    Sought { label: String, slot: Slot },
}

struct Node {
    label: String,
    children: Vec<Option<usize>>,
}

struct Machine {
    nodes: Vec<Node>,
    stack: Vec<Entry>,
    root: Option<usize>,
}

impl Machine {
    fn describe_stack(&self) -> String {
        self.stack
            .iter()
            .rev()
            .map(|e| match e {
                Entry::Found { node, .. } => self.nodes[*node].label.clone(),
                Entry::Sought { label, .. } => format!("-{label}"),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn fill(&mut self, slot: Slot, node: usize) {
        match slot {
            Slot::Root => self.root = Some(node),
            Slot::Child(parent, i) => self.nodes[parent].children[i] = Some(node),
        }
    }

    fn build(&self, id: usize) -> Result<Tree> {
        let n = &self.nodes[id];
        let mut children = Vec::with_capacity(n.children.len());
        for c in &n.children {
            let c = c.ok_or_else(|| {
                Error::IncompleteDerivation(format!("`{}` has an unfilled daughter", n.label))
            })?;
            children.push(self.build(c)?);
        }
        Ok(Tree::node(n.label.clone(), children))
    }
}

/// Replays `moves` from a single sought `start`, returning the tree built
/// and the conditioning context of every move.
pub fn simulate(
    moves: &[LcMove],
    start: &str,
    composition: Composition,
) -> Result<(Tree, Vec<Step>)> {
    let mut m = Machine {
        nodes: Vec::new(),
        stack: vec![Entry::Sought {
            label: start.to_string(),
            slot: Slot::Root,
        }],
        root: None,
    };
    let mut steps = Vec::with_capacity(moves.len());
    for (index, mv) in moves.iter().enumerate() {
        let bad = |m: &Machine| Error::BadDerivation {
            index,
            mv: mv.to_string(),
            stack: m.describe_stack(),
        };
        let before = m.stack.len();
        let kind = match mv {
            LcMove::Shift(w) => {
                let gc = match m.stack.last() {
                    Some(Entry::Sought { label, .. }) => label.clone(),
                    _ => return Err(bad(&m)),
                };
                m.nodes.push(Node {
                    label: w.clone(),
                    children: Vec::new(),
                });
                m.stack.push(Entry::Found {
                    node: m.nodes.len() - 1,
                    attachable: true,
                });
                StepKind::Shift { lc: w.clone(), gc }
            }
            LcMove::Attach => {
                let n = m.stack.len();
                if n < 2 {
                    return Err(bad(&m));
                }
                let node = match &m.stack[n - 1] {
                    Entry::Found {
                        node,
                        attachable: true,
                    } => *node,
                    _ => return Err(bad(&m)),
                };
                let (gc, slot) = match &m.stack[n - 2] {
                    Entry::Sought { label, slot } if *label == m.nodes[node].label => {
                        (label.clone(), *slot)
                    }
                    _ => return Err(bad(&m)),
                };
                m.stack.truncate(n - 2);
                m.fill(slot, node);
                StepKind::Attach { lc: gc.clone(), gc }
            }
            LcMove::Project { rule, compose } => {
                let n = m.stack.len();
                if n < 2 {
                    return Err(bad(&m));
                }
                let (lc_node, attachable) = match &m.stack[n - 1] {
                    Entry::Found { node, attachable } => (*node, *attachable),
                    _ => return Err(bad(&m)),
                };
                let (gc, goal_slot) = match &m.stack[n - 2] {
                    Entry::Sought { label, slot } => (label.clone(), *slot),
                    _ => return Err(bad(&m)),
                };
                let lc = m.nodes[lc_node].label.clone();
                if rule.left_corner() != lc {
                    return Err(bad(&m));
                }
                if *compose && (composition == Composition::Delayed || rule.lhs != gc) {
                    return Err(bad(&m));
                }
                let mut children = vec![None; rule.arity()];
                children[0] = Some(lc_node);
                m.nodes.push(Node {
                    label: rule.lhs.clone(),
                    children,
                });
                let mother = m.nodes.len() - 1;
                m.stack.pop();
                if *compose {
                    m.stack.pop();
                    m.fill(goal_slot, mother);
                } else {
                    m.stack.push(Entry::Found {
                        node: mother,
                        attachable: composition == Composition::Delayed,
                    });
                }
                for i in (1..rule.arity()).rev() {
                    m.stack.push(Entry::Sought {
                        label: rule.rhs[i].clone(),
                        slot: Slot::Child(mother, i),
                    });
                }
                StepKind::Project {
                    lc,
                    gc,
                    rule: rule.clone(),
                    compose: *compose,
                    attachable,
                }
            }
        };
        steps.push(Step {
            index,
            stack_len: before,
            delta: m.stack.len() as i32 - before as i32,
            kind,
        });
    }
    if !m.stack.is_empty() {
        return Err(Error::IncompleteDerivation(format!(
            "stack not empty at end: [{}]",
            m.describe_stack()
        )));
    }
    let root = m
        .root
        .ok_or_else(|| Error::IncompleteDerivation("start goal never filled".into()))?;
    Ok((m.build(root)?, steps))
}

/// Rebuilds the tree a complete derivation describes.
pub fn replay(moves: &[LcMove], start: &str, composition: Composition) -> Result<Tree> {
    simulate(moves, start, composition).map(|(t, _)| t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::read_trees;

    fn tree(s: &str) -> Tree {
        read_trees(s).unwrap().pop().unwrap()
    }

    fn shift(w: &str) -> LcMove {
        LcMove::Shift(w.into())
    }

    fn proj(lhs: &str, rhs: &[&str]) -> LcMove {
        LcMove::Project {
            rule: Rule::new(lhs, rhs.iter().copied()),
            compose: false,
        }
    }

    #[test]
    fn two_word_derivation() {
        let t = tree("(S (NP (j)) (VP (r)))");
        let d = lc_derivation(&t, Composition::Delayed);
        assert_eq!(
            d,
            vec![
                shift("j"),
                proj("NP", &["j"]),
                proj("S", &["NP", "VP"]),
                shift("r"),
                proj("VP", &["r"]),
                LcMove::Attach,
                LcMove::Attach,
            ]
        );
        assert_eq!(replay(&d, "S", Composition::Delayed).unwrap(), t);
    }

    #[test]
    fn single_preterminal_derivation() {
        let t = tree("(S (a))");
        let d = lc_derivation(&t, Composition::Delayed);
        assert_eq!(d, vec![shift("a"), proj("S", &["a"]), LcMove::Attach]);
        assert_eq!(replay(&d, "S", Composition::Delayed).unwrap(), t);
    }

    #[test]
    fn composed_derivation_has_no_final_attach() {
        let t = tree("(S (NP (j)) (VP (r)))");
        let d = lc_derivation(&t, Composition::Immediate);
        assert_eq!(d.len(), 5);
        assert!(matches!(d[2], LcMove::Project { compose: true, .. }));
        assert!(matches!(d[4], LcMove::Project { compose: true, .. }));
        assert_eq!(replay(&d, "S", Composition::Immediate).unwrap(), t);
    }

    #[test]
    fn terminal_daughters_attach_under_composition() {
        let t = tree("(NP DT NN)");
        let d = lc_derivation(&t, Composition::Immediate);
        assert_eq!(
            d,
            vec![
                shift("DT"),
                LcMove::Project {
                    rule: Rule::new("NP", ["DT", "NN"]),
                    compose: true
                },
                shift("NN"),
                LcMove::Attach
            ]
        );
        assert_eq!(replay(&d, "NP", Composition::Immediate).unwrap(), t);
    }

    fn left_chain(k: usize) -> Tree {
        let mut t = Tree::node("S", vec![Tree::leaf("a"), Tree::leaf("b")]);
        for _ in 1..k {
            t = Tree::node("S", vec![t, Tree::leaf("b")]);
        }
        t
    }

    fn right_chain(k: usize) -> Tree {
        let mut t = Tree::node("S", vec![Tree::leaf("a"), Tree::leaf("b")]);
        for _ in 1..k {
            t = Tree::node("S", vec![Tree::leaf("a"), t]);
        }
        t
    }

    fn max_stack(t: &Tree, c: Composition) -> (usize, usize) {
        let d = lc_derivation(t, c);
        let (_, steps) = simulate(&d, &t.label, c).unwrap();
        let max = steps
            .iter()
            .map(|s| (s.stack_len as i32 + s.delta) as usize)
            .max()
            .unwrap();
        (d.len(), max)
    }

    #[test]
    fn left_branching_is_bounded_and_linear() {
        let (n10, m10) = max_stack(&left_chain(10), Composition::Delayed);
        let (n11, _) = max_stack(&left_chain(11), Composition::Delayed);
        let (n40, m40) = max_stack(&left_chain(40), Composition::Delayed);
        assert_eq!(m10, m40);
        assert_eq!(n40 - n10, 30 * (n11 - n10));
    }

    #[test]
    fn right_branching_needs_composition() {
        let (_, d10) = max_stack(&right_chain(10), Composition::Delayed);
        let (_, d40) = max_stack(&right_chain(40), Composition::Delayed);
        assert!(d40 > d10);
        let (_, c10) = max_stack(&right_chain(10), Composition::Immediate);
        let (_, c40) = max_stack(&right_chain(40), Composition::Immediate);
        assert_eq!(c10, c40);
    }

    #[test]
    fn inconsistent_moves_are_reported() {
        let d = vec![shift("j"), LcMove::Attach];
        match replay(&d, "S", Composition::Delayed) {
            Err(Error::BadDerivation { index, stack, .. }) => {
                assert_eq!(index, 1);
                assert_eq!(stack, "j -S");
            }
            other => panic!("{other:?}"),
        }
        let d = vec![shift("j"), proj("NP", &["x"])];
        assert!(matches!(
            replay(&d, "S", Composition::Delayed),
            Err(Error::BadDerivation { index: 1, .. })
        ));
        let d = vec![shift("j"), proj("S", &["j"])];
        assert!(matches!(
            replay(&d, "S", Composition::Delayed),
            Err(Error::IncompleteDerivation(_))
        ));
        // Composing is not a delayed-composition move.
        let d = vec![
            shift("a"),
            LcMove::Project {
                rule: Rule::new("S", ["a"]),
                compose: true,
            },
        ];
        assert!(replay(&d, "S", Composition::Delayed).is_err());
        assert!(replay(&d, "S", Composition::Immediate).is_ok());
    }

    #[test]
    fn step_deltas_follow_rule_shape() {
        let t = tree("(ROOT (S (NP DT NN) (VP VB)))");
        let d = lc_derivation(&t, Composition::Immediate);
        let (_, steps) = simulate(&d, "ROOT", Composition::Immediate).unwrap();
        for s in &steps {
            if let StepKind::Project { rule, compose, .. } = &s.kind {
                let n = rule.arity() as i32;
                assert_eq!(s.delta, if *compose { n - 3 } else { n - 1 }, "{s:?}");
            }
            if let StepKind::Attach { .. } = s.kind {
                assert_eq!(s.delta, -2);
            }
        }
    }
}
