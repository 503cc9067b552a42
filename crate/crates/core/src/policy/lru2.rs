use super::list::KeyList;
use super::{PolicyKind, ReplacementPolicy};
use crate::heap::IndexedMinHeap;
use crate::hotness::Key;

/// Last two access times of a key; `penultimate == 0` means only one access
/// has been seen. Ordering is by penultimate access, then by last access, so
/// single-access keys are the first victims, oldest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct AccessHistory {
    pub penultimate: u64,
    pub last: u64,
}

/// LRU-2: evicts the resident key whose second-most-recent access is oldest.
/// Access history of evicted keys is kept in an LRU-ordered ghost list of
/// `history_size` entries and restored when the key comes back.
#[derive(Debug, Clone)]
pub struct Lru2 {
    capacity: usize,
    history_size: usize,
    clock: u64,
    resident: IndexedMinHeap<Key, AccessHistory>,
    ghosts: KeyList<Key, AccessHistory>,
}

impl Lru2 {
    pub fn new(capacity: usize, history_size: usize) -> Self {
        Lru2 {
            capacity,
            history_size,
            clock: 0,
            resident: IndexedMinHeap::with_capacity(capacity.min(1 << 20)),
            ghosts: KeyList::new(),
        }
    }

    pub fn history_size(&self) -> usize {
        self.history_size
    }

    pub fn ghost_len(&self) -> usize {
        self.ghosts.len()
    }

    pub fn history_of(&self, key: Key) -> Option<AccessHistory> {
        self.resident
            .get(&key)
            .map(|n| n.priority)
            .or_else(|| self.ghosts.get(&key).copied())
    }

    fn retire(&mut self, key: Key, history: AccessHistory) {
        if self.history_size == 0 {
            return;
        }
        self.ghosts.push_front(key, history);
        while self.ghosts.len() > self.history_size {
            self.ghosts.pop_back();
        }
    }
}

impl ReplacementPolicy for Lru2 {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Lru2
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn len(&self) -> usize {
        self.resident.len()
    }

    fn get(&mut self, key: Key) -> bool {
        self.clock += 1;
        let now = self.clock;
        if let Some(node) = self.resident.get(&key) {
            let next = AccessHistory {
                penultimate: node.priority.last,
                last: now,
            };
            self.resident.set_priority(&key, next);
            return true;
        }
        if self.capacity == 0 {
            return false;
        }
        let history = match self.ghosts.remove(&key) {
            Some(old) => AccessHistory {
                penultimate: old.last,
                last: now,
            },
            None => AccessHistory {
                penultimate: 0,
                last: now,
            },
        };
        if self.resident.len() >= self.capacity {
            let victim = self.resident.pop().expect("full cache has a root");
            self.retire(victim.key, victim.priority);
        }
        self.resident.push(key, history, ());
        false
    }

    fn invalidate(&mut self, key: Key) -> bool {
        match self.resident.remove(&key) {
            Some(node) => {
                self.retire(node.key, node.priority);
                true
            }
            None => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_access_keys_go_first() {
        let mut c = Lru2::new(2, 0);
        c.get(Key(1));
        c.get(Key(1));
        c.get(Key(2));
        c.get(Key(3)); // evicts 2: only one access
        assert!(c.get(Key(1)));
        assert!(c.get(Key(3)));
        assert!(!c.get(Key(2)));
    }

    #[test]
    fn ties_among_singletons_break_by_last_access() {
        let mut c = Lru2::new(2, 0);
        c.get(Key(1));
        c.get(Key(2));
        c.get(Key(3)); // evicts 1
        assert_eq!(c.history_of(Key(1)), None);
        assert!(c.get(Key(2)));
    }

    #[test]
    fn ghost_history_is_restored() {
        let mut c = Lru2::new(1, 4);
        c.get(Key(1)); // t1
        c.get(Key(2)); // t2, 1 -> ghost with last=1
        assert_eq!(c.history_of(Key(1)), Some(AccessHistory { penultimate: 0, last: 1 }));
        c.get(Key(1)); // t3, restored: penultimate = 1
        assert_eq!(c.history_of(Key(1)), Some(AccessHistory { penultimate: 1, last: 3 }));
        assert_eq!(c.ghost_len(), 1);
    }

    #[test]
    fn ghost_list_is_bounded() {
        let mut c = Lru2::new(1, 2);
        for k in 0..10 {
            c.get(Key(k));
        }
        assert_eq!(c.ghost_len(), 2);
        assert!(c.history_of(Key(8)).is_some());
        assert!(c.history_of(Key(7)).is_some());
        assert!(c.history_of(Key(6)).is_none());
    }
}
