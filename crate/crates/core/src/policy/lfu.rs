use super::{PolicyKind, ReplacementPolicy};
use crate::heap::IndexedMinHeap;
use crate::hotness::Key;

/// Least-frequently-used over resident keys only. A newly admitted key starts
/// at frequency 1 and replaces the heap root; evicted keys lose their count.
#[derive(Debug, Clone)]
pub struct Lfu {
    capacity: usize,
    heap: IndexedMinHeap<Key, u64>,
}

impl Lfu {
    pub fn new(capacity: usize) -> Self {
        Lfu {
            capacity,
            heap: IndexedMinHeap::with_capacity(capacity.min(1 << 20)),
        }
    }

    pub fn frequency(&self, key: Key) -> Option<u64> {
        self.heap.get(&key).map(|n| n.priority)
    }
}

impl ReplacementPolicy for Lfu {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Lfu
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn len(&self) -> usize {
        self.heap.len()
    }

    fn get(&mut self, key: Key) -> bool {
        if let Some(freq) = self.frequency(key) {
            self.heap.set_priority(&key, freq + 1);
            return true;
        }
        if self.capacity == 0 {
            return false;
        }
        if self.heap.len() >= self.capacity {
            self.heap.pop();
        }
        self.heap.push(key, 1, ());
        false
    }

    fn invalidate(&mut self, key: Key) -> bool {
        self.heap.remove(&key).is_some()
    }
}
