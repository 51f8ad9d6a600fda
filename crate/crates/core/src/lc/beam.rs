use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use super::{CMove, Entry, Handle, LcParser, PrefixStore};
use crate::tree::Tree;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamOptions {
    /// States kept per word boundary.
    pub beam: usize,
    pub n_best: usize,
    /// Longest run of non-shift moves a state may make.
    pub max_unshifted: usize,
}

impl Default for BeamOptions {
    fn default() -> Self {
        BeamOptions {
            beam: 1000,
            n_best: 1,
            max_unshifted: 50,
        }
    }
}

/// A partial parse. Stack and move history live in a [`SearchSpace`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParserState {
    pub stack: Handle,
    pub moves: Handle,
    pub log_prob: f64,
    pub words_consumed: usize,
    /// Non-shift moves since the last shift.
    pub since_shift: usize,
    /// Lower bound on the words still needed: sought entries with no found
    /// constituent above them.
    pub needed: usize,
}

/// Shared storage for the stacks and move histories of one search.
#[derive(Debug, Default)]
pub struct SearchSpace {
    pub stacks: PrefixStore<Entry>,
    pub moves: PrefixStore<CMove>,
}

impl SearchSpace {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Change in the words-needed bound from pushing `e` onto a stack whose top
/// is `below`.
fn need_change(e: Entry, below: Option<Entry>) -> isize {
    match (e, below) {
        (Entry::Sought(_), _) => 1,
        (Entry::Found { .. }, Some(Entry::Sought(_))) => -1,
        _ => 0,
    }
}

/// Words-needed bound of a whole stack, bottom first.
pub(crate) fn words_needed(stack: &[Entry]) -> usize {
    let mut below = None;
    let mut n = 0;
    for &e in stack {
        n += need_change(e, below);
        below = Some(e);
    }
    n as usize
}

/// Heap entry: higher score first, then earlier insertion.
struct Queued {
    state: ParserState,
    order: usize,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.state
            .log_prob
            .total_cmp(&other.state.log_prob)
            .then_with(|| other.order.cmp(&self.order))
    }
}

impl LcParser {
    pub fn initial_state(&self, space: &mut SearchSpace) -> ParserState {
        ParserState {
            stack: space.stacks.push(Handle::EMPTY, self.initial_entry()),
            moves: Handle::EMPTY,
            log_prob: 0.0,
            words_consumed: 0,
            since_shift: 0,
            needed: 1,
        }
    }

    /// Every state one move on from `state`, with the move's log
    /// probability. A sought goal on top forces a shift of `next`; with no
    /// next tag there is no successor.
    pub fn successors(
        &self,
        space: &mut SearchSpace,
        state: &ParserState,
        next: Option<u32>,
    ) -> Vec<(ParserState, f64)> {
        let Some(top) = space.stacks.last(state.stack) else {
            return Vec::new();
        };
        let below = space.stacks.last(space.stacks.parent(state.stack));
        match top {
            Entry::Sought(gc) => {
                let Some(lc) = next else {
                    return Vec::new();
                };
                let lp = self.shift_log_prob(gc, lc);
                if lp == f64::NEG_INFINITY {
                    return Vec::new();
                }
                vec![(self.apply(space, state, CMove::Shift(lc), lp), lp)]
            }
            Entry::Found { .. } => {
                let len = space.stacks.depth(state.stack);
                self.actions(top, below, len)
                    .iter()
                    .map(|a| (self.apply(space, state, a.mv, a.log_prob), a.log_prob))
                    .collect()
            }
        }
    }

    fn apply(
        &self,
        space: &mut SearchSpace,
        state: &ParserState,
        mv: CMove,
        log_prob: f64,
    ) -> ParserState {
        let top = space.stacks.last(state.stack);
        let (pops, pushes) = self.effect(mv, top);
        let mut stack = state.stack;
        let mut needed = state.needed as isize;
        for _ in 0..pops {
            let e = space
                .stacks
                .last(stack)
                .expect("pop from a non-empty stack");
            stack = space.stacks.parent(stack);
            needed -= need_change(e, space.stacks.last(stack));
        }
        for e in pushes {
            needed += need_change(e, space.stacks.last(stack));
            stack = space.stacks.push(stack, e);
        }
        let shift = matches!(mv, CMove::Shift(_));
        ParserState {
            stack,
            moves: space.moves.push(state.moves, mv),
            log_prob: state.log_prob + log_prob,
            words_consumed: state.words_consumed + usize::from(shift),
            since_shift: if shift { 0 } else { state.since_shift + 1 },
            needed: needed as usize,
        }
    }

    /// Complete states found by beam search, best first.
    pub fn beam_search<S: AsRef<str>>(
        &self,
        tags: &[S],
        opts: &BeamOptions,
        space: &mut SearchSpace,
    ) -> Vec<ParserState> {
        let n = tags.len();
        let Some(ids) = self.tag_ids(tags) else {
            return Vec::new();
        };
        if n == 0 {
            return Vec::new();
        }
        let k = opts.beam.max(1);
        let mut beam = vec![self.initial_state(space)];
        for w in 0..=n {
            let remaining = n - w;
            // Best-first expansion: moves never raise a score, so the first k
            // ready states popped are the k best reachable from this beam.
            let mut ready: Vec<ParserState> = Vec::new();
            let mut heap: BinaryHeap<Queued> = BinaryHeap::new();
            let mut order = 0usize;
            for s in beam {
                heap.push(Queued { state: s, order });
                order += 1;
            }
            while ready.len() < k {
                let Some(Queued { state: s, .. }) = heap.pop() else {
                    break;
                };
                match space.stacks.last(s.stack) {
                    None if remaining == 0 => ready.push(s),
                    None => {}
                    Some(Entry::Sought(_)) if remaining > 0 => ready.push(s),
                    Some(Entry::Sought(_)) => {}
                    Some(Entry::Found { .. }) => {
                        if s.since_shift >= opts.max_unshifted {
                            continue;
                        }
                        for (t, _) in self.successors(space, &s, None) {
                            if t.needed <= remaining {
                                heap.push(Queued { state: t, order });
                                order += 1;
                            }
                        }
                    }
                }
            }
            if w == n {
                ready.sort_by(|a, b| b.log_prob.total_cmp(&a.log_prob));
                return ready;
            }
            let mut shifted = Vec::with_capacity(ready.len());
            for s in &ready {
                for (t, _) in self.successors(space, s, Some(ids[w])) {
                    shifted.push(t);
                }
            }
            shifted.sort_by(|a, b| b.log_prob.total_cmp(&a.log_prob));
            shifted.truncate(k);
            beam = shifted;
        }
        unreachable!()
    }

    /// Up to `opts.n_best` distinct trees over `tags`, best first. Trees
    /// reached by several derivations keep their best score.
    pub fn beam_parse<S: AsRef<str>>(&self, tags: &[S], opts: &BeamOptions) -> Vec<(Tree, f64)> {
        let mut space = SearchSpace::new();
        let complete = self.beam_search(tags, opts, &mut space);
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for s in complete {
            if out.len() >= opts.n_best {
                break;
            }
            let tree = self
                .recover_tree(&space.moves, s.moves)
                .expect("complete states replay");
            if seen.insert(tree.clone()) {
                out.push((tree, s.log_prob));
            }
        }
        out
    }
}
