//! Interning of packed states with dense indices in first-seen order.

use std::hash::BuildHasher;

use hashbrown::HashTable;
use rustc_hash::FxBuildHasher;

/// How a state was first reached during breadth-first construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pred {
    pub from: u32,
    pub transition: u32,
}

impl Pred {
    const ROOT: Pred = Pred {
        from: u32::MAX,
        transition: u32::MAX,
    };

    pub fn is_root(self) -> bool {
        self == Pred::ROOT
    }
}

/// All states are kept back to back in one flat word vector; the hash table
/// only holds indices into it.
pub struct StateStore {
    stride: usize,
    words: Vec<u64>,
    len: usize,
    table: HashTable<u32>,
    hasher: FxBuildHasher,
    preds: Option<Vec<Pred>>,
}

impl StateStore {
    pub fn new(stride: usize) -> Self {
        Self::with_preds(stride, true)
    }

    pub fn with_preds(stride: usize, keep_preds: bool) -> Self {
        StateStore {
            stride,
            words: Vec::new(),
            len: 0,
            table: HashTable::new(),
            hasher: FxBuildHasher,
            preds: keep_preds.then(Vec::new),
        }
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, index: usize) -> &[u64] {
        assert!(index < self.len, "state index {index} out of range");
        &self.words[index * self.stride..(index + 1) * self.stride]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u64]> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn lookup(&self, state: &[u64]) -> Option<usize> {
        debug_assert_eq!(state.len(), self.stride);
        let hash = self.hasher.hash_one(state);
        let (words, stride) = (&self.words, self.stride);
        self.table
            .find(hash, |&i| {
                let i = i as usize;
                &words[i * stride..(i + 1) * stride] == state
            })
            .map(|&i| i as usize)
    }

    /// Returns `(index, is_new)`. Predecessor bookkeeping records the
    /// state as a root.
    pub fn intern(&mut self, state: &[u64]) -> (usize, bool) {
        self.intern_from(state, Pred::ROOT)
    }

    /// Like [`intern`](Self::intern) but records `pred` for a new state.
    pub fn intern_from(&mut self, state: &[u64], pred: Pred) -> (usize, bool) {
        assert_eq!(state.len(), self.stride, "state has the wrong word count");
        let hash = self.hasher.hash_one(state);
        let (words, stride, hasher) = (&self.words, self.stride, &self.hasher);
        let entry = self.table.entry(
            hash,
            |&i| {
                let i = i as usize;
                &words[i * stride..(i + 1) * stride] == state
            },
            |&i| {
                let i = i as usize;
                hasher.hash_one(&words[i * stride..(i + 1) * stride])
            },
        );
        match entry {
            hashbrown::hash_table::Entry::Occupied(e) => (*e.get() as usize, false),
            hashbrown::hash_table::Entry::Vacant(e) => {
                let index = self.len;
                assert!(index < u32::MAX as usize, "state store index overflow");
                e.insert(index as u32);
                self.words.extend_from_slice(state);
                if let Some(preds) = &mut self.preds {
                    preds.push(pred);
                }
                self.len += 1;
                (index, true)
            }
        }
    }

    pub fn pred(&self, index: usize) -> Option<Pred> {
        let p = self.preds.as_ref()?[index];
        (!p.is_root()).then_some(p)
    }

    pub fn has_preds(&self) -> bool {
        self.preds.is_some()
    }

    /// Indices from a root to `index`, following predecessor records.
    pub fn path_to(&self, index: usize) -> Option<Vec<usize>> {
        self.preds.as_ref()?;
        let mut path = vec![index];
        let mut cur = index;
        while let Some(p) = self.pred(cur) {
            cur = p.from as usize;
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }

    /// Heap bytes held by the store (state words, index table, predecessors).
    pub fn heap_bytes(&self) -> usize {
        let words = self.words.capacity() * std::mem::size_of::<u64>();
        // One u32 slot plus one control byte per bucket.
        let table = self.table.capacity() * 8 / 7 * (std::mem::size_of::<u32>() + 1);
        let preds = self
            .preds
            .as_ref()
            .map_or(0, |p| p.capacity() * std::mem::size_of::<Pred>());
        words + table + preds
    }

    /// Heap bytes spent per state beyond the state's own words, in units of
    /// 64-bit words.
    pub fn overhead_words_per_state(&self) -> f64 {
        if self.len == 0 {
            return 0.0;
        }
        let own = self.len * self.stride * std::mem::size_of::<u64>();
        (self.heap_bytes().saturating_sub(own)) as f64 / self.len as f64 / 8.0
    }

    pub fn shrink_to_fit(&mut self) {
        self.words.shrink_to_fit();
        if let Some(p) = &mut self.preds {
            p.shrink_to_fit();
        }
        let (words, stride, hasher) = (&self.words, self.stride, &self.hasher);
        self.table.shrink_to_fit(|&i| {
            let i = i as usize;
            hasher.hash_one(&words[i * stride..(i + 1) * stride])
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn interning_is_idempotent() {
        let mut s = StateStore::new(2);
        assert_eq!(s.intern(&[1, 2]), (0, true));
        assert_eq!(s.intern(&[1, 2]), (0, false));
        assert_eq!(s.intern(&[2, 1]), (1, true));
        assert_eq!(s.lookup(&[2, 1]), Some(1));
        assert_eq!(s.lookup(&[3, 3]), None);
        assert_eq!(s.get(1), &[2, 1]);
    }

    #[test]
    fn zero_word_states_collapse_to_one() {
        let mut s = StateStore::new(0);
        assert_eq!(s.intern(&[]), (0, true));
        assert_eq!(s.intern(&[]), (0, false));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn paths_follow_predecessors() {
        let mut s = StateStore::new(1);
        s.intern(&[0]);
        s.intern_from(
            &[1],
            Pred {
                from: 0,
                transition: 4,
            },
        );
        s.intern_from(
            &[2],
            Pred {
                from: 1,
                transition: 0,
            },
        );
        // a later rediscovery does not overwrite the record
        s.intern_from(
            &[1],
            Pred {
                from: 2,
                transition: 1,
            },
        );
        assert_eq!(s.path_to(2), Some(vec![0, 1, 2]));
        assert_eq!(s.path_to(0), Some(vec![0]));
        assert_eq!(
            s.pred(1),
            Some(Pred {
                from: 0,
                transition: 4
            })
        );
        assert!(StateStore::with_preds(1, false).path_to(0).is_none());
    }

    proptest! {
        #[test]
        fn indices_are_a_dense_bijection(states in prop::collection::vec(prop::array::uniform2(0u64..6), 0..200)) {
            let mut store = StateStore::new(2);
            let mut reference: std::collections::HashMap<[u64; 2], usize> = Default::default();
            for st in &states {
                let next = reference.len();
                let want = *reference.entry(*st).or_insert(next);
                let (idx, is_new) = store.intern(st);
                prop_assert_eq!(idx, want);
                prop_assert_eq!(is_new, want == next);
            }
            prop_assert_eq!(store.len(), reference.len());
            for (st, idx) in reference {
                prop_assert_eq!(store.get(idx), &st[..]);
            }
        }
    }
}
