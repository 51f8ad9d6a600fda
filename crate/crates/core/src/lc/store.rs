use std::collections::HashMap;
use std::hash::Hash;

/// Reference to a sequence held in a [`PrefixStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Handle(u32);

impl Handle {
    /// The empty sequence.
    pub const EMPTY: Handle = Handle(u32::MAX);

    pub fn is_empty(self) -> bool {
        self == Handle::EMPTY
    }
}

#[derive(Debug, Clone)]
struct Node<T> {
    parent: Handle,
    item: T,
    depth: u32,
}

/// Trie of sequences stored as parent pointers. Extending a sequence by an
/// item it has already been extended by returns the existing handle, so
/// equal sequences share one handle and shared prefixes are stored once.
#[derive(Debug, Clone)]
pub struct PrefixStore<T> {
    nodes: Vec<Node<T>>,
    index: HashMap<(Handle, T), Handle>,
}

impl<T: Copy + Eq + Hash> Default for PrefixStore<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Copy + Eq + Hash> PrefixStore<T> {
    pub fn new() -> Self {
        PrefixStore {
            nodes: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn push(&mut self, h: Handle, item: T) -> Handle {
        if let Some(&found) = self.index.get(&(h, item)) {
            return found;
        }
        let depth = self.depth(h) + 1;
        assert!(self.nodes.len() < u32::MAX as usize, "prefix store is full");
        self.nodes.push(Node {
            parent: h,
            item,
            depth: depth as u32,
        });
        let new = Handle(self.nodes.len() as u32 - 1);
        self.index.insert((h, item), new);
        new
    }

    /// Last item of the sequence.
    pub fn last(&self, h: Handle) -> Option<T> {
        self.node(h).map(|n| n.item)
    }

    /// The sequence without its last item.
    pub fn parent(&self, h: Handle) -> Handle {
        self.node(h).map_or(Handle::EMPTY, |n| n.parent)
    }

    pub fn depth(&self, h: Handle) -> usize {
        self.node(h).map_or(0, |n| n.depth as usize)
    }

    /// The sequence, first item first.
    pub fn to_vec(&self, mut h: Handle) -> Vec<T> {
        let mut out = Vec::with_capacity(self.depth(h));
        while let Some(n) = self.node(h) {
            out.push(n.item);
            h = n.parent;
        }
        out.reverse();
        out
    }

    /// Number of stored nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn node(&self, h: Handle) -> Option<&Node<T>> {
        if h.is_empty() {
            None
        } else {
            Some(&self.nodes[h.0 as usize])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn shares_prefixes() {
        let mut s = PrefixStore::new();
        let a = s.push(Handle::EMPTY, 'a');
        let ab = s.push(a, 'b');
        let ac = s.push(a, 'c');
        assert_eq!(s.push(a, 'b'), ab);
        assert_eq!(s.len(), 3);
        assert_eq!(s.to_vec(ab), vec!['a', 'b']);
        assert_eq!(s.to_vec(ac), vec!['a', 'c']);
        assert_eq!(s.parent(ac), a);
        assert_eq!(s.depth(ac), 2);
        assert!(s.to_vec(Handle::EMPTY).is_empty());
        assert_eq!(s.last(Handle::EMPTY), None);
    }

    proptest! {
        #[test]
        fn handles_reconstruct_their_sequences(seqs in prop::collection::vec(prop::collection::vec(0u8..4, 0..12), 1..40)) {
            let mut s = PrefixStore::new();
            let handles: Vec<Handle> = seqs
                .iter()
                .map(|seq| seq.iter().fold(Handle::EMPTY, |h, &x| s.push(h, x)))
                .collect();
            for (seq, &h) in seqs.iter().zip(&handles) {
                prop_assert_eq!(&s.to_vec(h), seq);
            }
            for (i, a) in seqs.iter().enumerate() {
                for (j, b) in seqs.iter().enumerate() {
                    prop_assert_eq!(a == b, handles[i] == handles[j]);
                }
            }
        }
    }
}
