use super::list::KeyList;
use super::{PolicyKind, ReplacementPolicy};
use crate::hotness::Key;

/// Least-recently-used: move-to-front on hit, evict the tail on a full miss.
#[derive(Debug, Clone)]
pub struct Lru {
    capacity: usize,
    list: KeyList<Key>,
}

impl Lru {
    pub fn new(capacity: usize) -> Self {
        Lru {
            capacity,
            list: KeyList::new(),
        }
    }

    /// Resident keys, most recent first.
    pub fn keys(&self) -> impl Iterator<Item = Key> + '_ {
        self.list.iter().copied()
    }
}

impl ReplacementPolicy for Lru {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Lru
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn len(&self) -> usize {
        self.list.len()
    }

    fn get(&mut self, key: Key) -> bool {
        if self.list.touch(&key) {
            return true;
        }
        if self.capacity == 0 {
            return false;
        }
        if self.list.len() >= self.capacity {
            self.list.pop_back();
        }
        self.list.push_front(key, ());
        false
    }

    fn invalidate(&mut self, key: Key) -> bool {
        self.list.remove(&key).is_some()
    }
}
