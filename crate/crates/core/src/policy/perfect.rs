use std::sync::Arc;

use rustc_hash::FxHashSet;

use super::{PolicyKind, ReplacementPolicy};
use crate::hotness::Key;

/// Which keys an omniscient cache holds.
#[derive(Debug, Clone)]
pub enum Ranking {
    /// Key id is its popularity rank, 1 hottest.
    KeyIsRank,
    /// Keys hottest first.
    Explicit(Arc<[Key]>),
}

/// The theoretical perfect cache: always holds exactly the top-C keys of a
/// known ranking. Stateless; a hit depends only on the key.
#[derive(Debug, Clone)]
pub struct Perfect {
    capacity: usize,
    top: Option<FxHashSet<Key>>,
}

impl Perfect {
    pub fn new(capacity: usize, ranking: Ranking) -> Self {
        let top = match ranking {
            Ranking::KeyIsRank => None,
            Ranking::Explicit(keys) => Some(keys.iter().take(capacity).copied().collect()),
        };
        Perfect { capacity, top }
    }

    pub fn holds(&self, key: Key) -> bool {
        match &self.top {
            None => key.0 >= 1 && key.0 <= self.capacity as u64,
            Some(set) => set.contains(&key),
        }
    }
}

impl ReplacementPolicy for Perfect {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Perfect
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn len(&self) -> usize {
        self.capacity
    }

    fn get(&mut self, key: Key) -> bool {
        self.holds(key)
    }

    /// Writes never evict from the omniscient cache.
    fn invalidate(&mut self, _key: Key) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_test() {
        let mut p = Perfect::new(2, Ranking::KeyIsRank);
        let hits: Vec<bool> = [1, 3, 2].iter().map(|&k| p.get(Key(k))).collect();
        assert_eq!(hits, vec![true, false, true]);

        let ranking: Arc<[Key]> = vec![Key(7), Key(9), Key(1)].into();
        let mut p = Perfect::new(2, Ranking::Explicit(ranking));
        assert!(p.get(Key(9)));
        assert!(!p.get(Key(1)));
    }
}
