//! Binary min-heap with a key -> slot index.
//!
//! Used by the tracker, the CoT cache, LFU and LRU-2. Each node carries a
//! key, an ordering priority and an arbitrary payload. Lookups by key are
//! O(1), priority changes and removals O(log n).

use std::hash::Hash;

use rustc_hash::FxHashMap;

#[derive(Debug, Clone)]
pub struct Node<K, P, V> {
    pub key: K,
    pub priority: P,
    pub value: V,
}

#[derive(Debug, Clone)]
pub struct IndexedMinHeap<K, P, V = ()> {
    nodes: Vec<Node<K, P, V>>,
    index: FxHashMap<K, usize>,
}

impl<K, P, V> Default for IndexedMinHeap<K, P, V>
where
    K: Copy + Eq + Hash,
    P: Ord + Copy,
{
    fn default() -> Self {
        Self::new()
    }
}

impl<K, P, V> IndexedMinHeap<K, P, V>
where
    K: Copy + Eq + Hash,
    P: Ord + Copy,
{
    pub fn new() -> Self {
        IndexedMinHeap {
            nodes: Vec::new(),
            index: FxHashMap::default(),
        }
    }

    pub fn with_capacity(capacity: usize) -> Self {
        let mut index = FxHashMap::default();
        index.reserve(capacity);
        IndexedMinHeap {
            nodes: Vec::with_capacity(capacity),
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, key: &K) -> bool {
        self.index.contains_key(key)
    }

    pub fn position(&self, key: &K) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn peek(&self) -> Option<&Node<K, P, V>> {
        self.nodes.first()
    }

    pub fn get(&self, key: &K) -> Option<&Node<K, P, V>> {
        self.index.get(key).map(|&i| &self.nodes[i])
    }

    /// Mutable access to the payload only; the priority stays put so the heap
    /// property cannot be broken through this handle.
    pub fn value_mut(&mut self, key: &K) -> Option<&mut V> {
        let i = *self.index.get(key)?;
        Some(&mut self.nodes[i].value)
    }

    pub fn node_at(&self, slot: usize) -> Option<&Node<K, P, V>> {
        self.nodes.get(slot)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Node<K, P, V>> {
        self.nodes.iter()
    }

    /// Inserts a new key. Returns `false` (and does nothing) if the key is
    /// already present.
    pub fn push(&mut self, key: K, priority: P, value: V) -> bool {
        if self.index.contains_key(&key) {
            return false;
        }
        let slot = self.nodes.len();
        self.nodes.push(Node { key, priority, value });
        self.index.insert(key, slot);
        self.sift_up(slot);
        true
    }

    pub fn pop(&mut self) -> Option<Node<K, P, V>> {
        if self.nodes.is_empty() {
            return None;
        }
        Some(self.remove_at(0))
    }

    pub fn remove(&mut self, key: &K) -> Option<Node<K, P, V>> {
        let slot = *self.index.get(key)?;
        Some(self.remove_at(slot))
    }

    pub fn remove_at(&mut self, slot: usize) -> Node<K, P, V> {
        let last = self.nodes.len() - 1;
        self.swap(slot, last);
        let node = self.nodes.pop().expect("non-empty heap");
        self.index.remove(&node.key);
        if slot < self.nodes.len() {
            self.restore(slot);
        }
        node
    }

    /// Sets a key's priority and re-sifts. Returns `false` if the key is absent.
    pub fn set_priority(&mut self, key: &K, priority: P) -> bool {
        match self.index.get(key) {
            Some(&slot) => {
                self.nodes[slot].priority = priority;
                self.restore(slot);
                true
            }
            None => false,
        }
    }

    /// Replaces every priority through `f` and rebuilds the heap in O(n).
    pub fn reprioritize_all(&mut self, mut f: impl FnMut(&K, &mut V) -> P) {
        for node in &mut self.nodes {
            node.priority = f(&node.key, &mut node.value);
        }
        self.heapify();
    }

    pub fn clear(&mut self) {
        self.nodes.clear();
        self.index.clear();
    }

    /// The minimum-priority node satisfying `accept`, found by best-first
    /// search from the root. Only nodes whose ancestors were all rejected are
    /// visited, so the cost is bounded by the number of rejected nodes near
    /// the top of the heap.
    pub fn min_where(&self, mut accept: impl FnMut(&Node<K, P, V>) -> bool) -> Option<usize> {
        if self.nodes.is_empty() {
            return None;
        }
        if accept(&self.nodes[0]) {
            return Some(0);
        }
        let mut frontier = std::collections::BinaryHeap::new();
        frontier.push(std::cmp::Reverse((self.nodes[0].priority, 0usize)));
        while let Some(std::cmp::Reverse((_, slot))) = frontier.pop() {
            if accept(&self.nodes[slot]) {
                return Some(slot);
            }
            for child in [2 * slot + 1, 2 * slot + 2] {
                if child < self.nodes.len() {
                    frontier.push(std::cmp::Reverse((self.nodes[child].priority, child)));
                }
            }
        }
        None
    }

    /// Full scan of the heap property and the index bijection. Test support.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.index.len() != self.nodes.len() {
            return Err(format!(
                "index has {} entries but heap has {}",
                self.index.len(),
                self.nodes.len()
            ));
        }
        for (slot, node) in self.nodes.iter().enumerate() {
            match self.index.get(&node.key) {
                Some(&s) if s == slot => {}
                other => return Err(format!("slot {slot} indexed as {other:?}")),
            }
            if slot > 0 {
                let parent = (slot - 1) / 2;
                if self.nodes[parent].priority > node.priority {
                    return Err(format!("heap order violated at slot {slot}"));
                }
            }
        }
        Ok(())
    }

    fn heapify(&mut self) {
        for slot in (0..self.nodes.len() / 2).rev() {
            self.sift_down(slot);
        }
    }

    fn restore(&mut self, slot: usize) {
        if slot > 0 && self.nodes[slot].priority < self.nodes[(slot - 1) / 2].priority {
            self.sift_up(slot);
        } else {
            self.sift_down(slot);
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        self.nodes.swap(a, b);
        self.index.insert(self.nodes[a].key, a);
        self.index.insert(self.nodes[b].key, b);
    }

    fn sift_up(&mut self, mut slot: usize) {
        while slot > 0 {
            let parent = (slot - 1) / 2;
            if self.nodes[slot].priority < self.nodes[parent].priority {
                self.swap(slot, parent);
                slot = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut slot: usize) {
        let len = self.nodes.len();
        loop {
            let left = 2 * slot + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let smaller = if right < len && self.nodes[right].priority < self.nodes[left].priority {
                right
            } else {
                left
            };
            if self.nodes[smaller].priority < self.nodes[slot].priority {
                self.swap(slot, smaller);
                slot = smaller;
            } else {
                break;
            }
        }
    }
}
