//! Dense integer set with O(1) insert, remove, membership and uniform sampling.

use rand::Rng;

const ABSENT: usize = usize::MAX;

/// Set over `0..universe` backed by a swap-remove array and a position map.
///
/// Iteration order (and therefore `get(i)`) depends on the exact sequence of
/// inserts and removes, which is deterministic for a given run.
#[derive(Debug, Clone)]
pub struct IndexedSet {
    items: Vec<usize>,
    position: Vec<usize>,
}

impl IndexedSet {
    pub fn new(universe: usize) -> Self {
        IndexedSet {
            items: Vec::new(),
            position: vec![ABSENT; universe],
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.position[x] != ABSENT
    }

    /// Returns false if `x` was already present.
    pub fn insert(&mut self, x: usize) -> bool {
        if self.contains(x) {
            return false;
        }
        self.position[x] = self.items.len();
        self.items.push(x);
        true
    }

    /// Returns false if `x` was absent.
    pub fn remove(&mut self, x: usize) -> bool {
        let pos = self.position[x];
        if pos == ABSENT {
            return false;
        }
        let last = self.items.pop().expect("non-empty");
        if last != x {
            self.items[pos] = last;
            self.position[last] = pos;
        }
        self.position[x] = ABSENT;
        true
    }

    pub fn set(&mut self, x: usize, present: bool) {
        if present {
            self.insert(x);
        } else {
            self.remove(x);
        }
    }

    pub fn get(&self, i: usize) -> usize {
        self.items[i]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        if self.items.is_empty() {
            None
        } else {
            Some(self.items[rng.random_range(0..self.items.len())])
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.items.iter().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    proptest! {
        #[test]
        fn mirrors_btreeset(ops in prop::collection::vec((any::<bool>(), 0usize..32), 0..200)) {
            let mut set = IndexedSet::new(32);
            let mut model = BTreeSet::new();
            for (insert, x) in ops {
                if insert {
                    prop_assert_eq!(set.insert(x), model.insert(x));
                } else {
                    prop_assert_eq!(set.remove(x), model.remove(&x));
                }
                prop_assert_eq!(set.len(), model.len());
            }
            let got: BTreeSet<usize> = set.iter().collect();
            prop_assert_eq!(got, model.clone());
            for x in 0..32 {
                prop_assert_eq!(set.contains(x), model.contains(&x));
            }
        }
    }

    #[test]
    fn sample_empty_is_none() {
        let set = IndexedSet::new(4);
        let mut rng = crate::rng::rng_from_seed(0);
        assert_eq!(set.sample(&mut rng), None);
    }
}
