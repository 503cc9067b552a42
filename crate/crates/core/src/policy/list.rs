//! Slab-backed doubly linked list of keys with an O(1) key index.
//!
//! Front is most recent, back is least recent.

use std::hash::Hash;

use rustc_hash::FxHashMap;

const NIL: usize = usize::MAX;

#[derive(Debug, Clone)]
struct Link<K, V> {
    key: K,
    value: V,
    prev: usize,
    next: usize,
}

#[derive(Debug, Clone)]
pub struct KeyList<K, V = ()> {
    links: Vec<Link<K, V>>,
    free: Vec<usize>,
    index: FxHashMap<K, usize>,
    head: usize,
    tail: usize,
}

impl<K: Copy + Eq + Hash, V> Default for KeyList<K, V> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Copy + Eq + Hash, V> KeyList<K, V> {
    pub fn new() -> Self {
        KeyList {
            links: Vec::new(),
            free: Vec::new(),
            index: FxHashMap::default(),
            head: NIL,
            tail: NIL,
        }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, key: &K) -> bool {
        self.index.contains_key(key)
    }

    pub fn get(&self, key: &K) -> Option<&V> {
        self.index.get(key).map(|&i| &self.links[i].value)
    }

    /// Inserts at the front, or moves an existing key there and replaces its value.
    pub fn push_front(&mut self, key: K, value: V) {
        if let Some(&i) = self.index.get(&key) {
            self.links[i].value = value;
            self.unlink(i);
            self.link_front(i);
            return;
        }
        let link = Link {
            key,
            value,
            prev: NIL,
            next: NIL,
        };
        let i = match self.free.pop() {
            Some(i) => {
                self.links[i] = link;
                i
            }
            None => {
                self.links.push(link);
                self.links.len() - 1
            }
        };
        self.index.insert(key, i);
        self.link_front(i);
    }

    /// Moves a key to the front. Returns `false` if absent.
    pub fn touch(&mut self, key: &K) -> bool {
        match self.index.get(key) {
            Some(&i) => {
                self.unlink(i);
                self.link_front(i);
                true
            }
            None => false,
        }
    }

    pub fn back(&self) -> Option<&K> {
        (self.tail != NIL).then(|| &self.links[self.tail].key)
    }

    pub fn pop_back(&mut self) -> Option<(K, V)>
    where
        V: Default,
    {
        let key = *self.back()?;
        self.remove(&key).map(|v| (key, v))
    }

    pub fn remove(&mut self, key: &K) -> Option<V>
    where
        V: Default,
    {
        let i = self.index.remove(key)?;
        self.unlink(i);
        self.free.push(i);
        Some(std::mem::take(&mut self.links[i].value))
    }

    /// Keys from front (most recent) to back.
    pub fn iter(&self) -> impl Iterator<Item = &K> {
        let mut cursor = self.head;
        std::iter::from_fn(move || {
            if cursor == NIL {
                return None;
            }
            let link = &self.links[cursor];
            cursor = link.next;
            Some(&link.key)
        })
    }

    pub fn clear(&mut self) {
        self.links.clear();
        self.free.clear();
        self.index.clear();
        self.head = NIL;
        self.tail = NIL;
    }

    fn unlink(&mut self, i: usize) {
        let (prev, next) = (self.links[i].prev, self.links[i].next);
        if prev == NIL {
            self.head = next;
        } else {
            self.links[prev].next = next;
        }
        if next == NIL {
            self.tail = prev;
        } else {
            self.links[next].prev = prev;
        }
        self.links[i].prev = NIL;
        self.links[i].next = NIL;
    }

    fn link_front(&mut self, i: usize) {
        self.links[i].prev = NIL;
        self.links[i].next = self.head;
        if self.head != NIL {
            self.links[self.head].prev = i;
        }
        self.head = i;
        if self.tail == NIL {
            self.tail = i;
        }
    }
}
