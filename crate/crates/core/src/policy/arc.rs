//! Adaptive Replacement Cache (Megiddo & Modha, FAST '03).
//!
//! Resident lists T1 (seen once recently) and T2 (seen at least twice), ghost
//! lists B1 and B2 remembering keys recently evicted from each, and a target
//! size `p` for T1 that moves toward whichever ghost list is getting hits.

use super::list::KeyList;
use super::{PolicyKind, ReplacementPolicy};
use crate::hotness::Key;

#[derive(Debug, Clone)]
pub struct ArcCache {
    capacity: usize,
    p: usize,
    t1: KeyList<Key>,
    t2: KeyList<Key>,
    b1: KeyList<Key>,
    b2: KeyList<Key>,
}

impl ArcCache {
    pub fn new(capacity: usize) -> Self {
        ArcCache {
            capacity,
            p: 0,
            t1: KeyList::new(),
            t2: KeyList::new(),
            b1: KeyList::new(),
            b2: KeyList::new(),
        }
    }

    /// Current T1 target.
    pub fn target_t1(&self) -> usize {
        self.p
    }

    /// `(|T1|, |T2|, |B1|, |B2|)`.
    pub fn list_sizes(&self) -> (usize, usize, usize, usize) {
        (self.t1.len(), self.t2.len(), self.b1.len(), self.b2.len())
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        let (t1, t2, b1, b2) = self.list_sizes();
        let c = self.capacity;
        if t1 + t2 > c {
            return Err(format!("|T1|+|T2| = {} > {c}", t1 + t2));
        }
        if t1 + b1 > c {
            return Err(format!("|T1|+|B1| = {} > {c}", t1 + b1));
        }
        if t1 + t2 + b1 + b2 > 2 * c {
            return Err(format!("directory size {} > 2c", t1 + t2 + b1 + b2));
        }
        if self.p > c {
            return Err(format!("p = {} > c", self.p));
        }
        Ok(())
    }

    /// Demotes one resident key to its ghost list.
    fn replace(&mut self, in_b2: bool) {
        let t1_len = self.t1.len();
        let from_t1 = t1_len >= 1 && (t1_len > self.p || (in_b2 && t1_len == self.p));
        if (from_t1 || self.t2.is_empty()) && !self.t1.is_empty() {
            let (k, ()) = self.t1.pop_back().expect("non-empty T1");
            self.b1.push_front(k, ());
        } else if let Some((k, ())) = self.t2.pop_back() {
            self.b2.push_front(k, ());
        }
    }
}

impl ReplacementPolicy for ArcCache {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Arc
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn len(&self) -> usize {
        self.t1.len() + self.t2.len()
    }

    fn get(&mut self, key: Key) -> bool {
        let c = self.capacity;
        if c == 0 {
            return false;
        }
        // Case I: resident hit.
        if self.t1.remove(&key).is_some() || self.t2.contains(&key) {
            self.t2.push_front(key, ());
            return true;
        }
        // Case II: ghost hit in B1, favour recency.
        if self.b1.contains(&key) {
            let delta = (self.b2.len() / self.b1.len()).max(1);
            self.p = (self.p + delta).min(c);
            if self.len() >= c {
                self.replace(false);
            }
            self.b1.remove(&key);
            self.t2.push_front(key, ());
            return false;
        }
        // Case III: ghost hit in B2, favour frequency.
        if self.b2.contains(&key) {
            let delta = (self.b1.len() / self.b2.len()).max(1);
            self.p = self.p.saturating_sub(delta);
            if self.len() >= c {
                self.replace(true);
            }
            self.b2.remove(&key);
            self.t2.push_front(key, ());
            return false;
        }
        // Case IV: complete miss. The resident-size guards only matter after
        // invalidations; without them the canonical rules are unchanged.
        let l1 = self.t1.len() + self.b1.len();
        let total = l1 + self.t2.len() + self.b2.len();
        if l1 >= c {
            if self.t1.len() < c {
                self.b1.pop_back();
                if self.t1.len() + self.t2.len() >= c {
                    self.replace(false);
                }
            } else {
                self.t1.pop_back();
            }
        } else if total >= c {
            if total >= 2 * c {
                self.b2.pop_back();
            }
            if self.t1.len() + self.t2.len() >= c {
                self.replace(false);
            }
        }
        self.t1.push_front(key, ());
        false
    }

    fn invalidate(&mut self, key: Key) -> bool {
        self.t1.remove(&key).is_some() || self.t2.remove(&key).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn resident(a: &ArcCache) -> (Vec<u64>, Vec<u64>) {
        (
            a.t1.iter().map(|k| k.0).collect(),
            a.t2.iter().map(|k| k.0).collect(),
        )
    }

    #[test]
    fn hand_trace() {
        // c = 2. Hand-simulated against the published REQUEST/REPLACE rules.
        let mut a = ArcCache::new(2);
        assert!(!a.get(Key(1))); // T1=[1]
        assert!(!a.get(Key(2))); // T1=[2,1]
        assert!(a.get(Key(1))); // T1=[2] T2=[1]
        assert_eq!(resident(&a), (vec![2], vec![1]));
        assert!(!a.get(Key(3))); // full: |T1|+|B1|=1<2, total=2: REPLACE -> T1 len 1 > p=0 -> 2 to B1
        assert_eq!(resident(&a), (vec![3], vec![1]));
        assert_eq!(a.list_sizes(), (1, 1, 1, 0));
        assert!(!a.get(Key(2))); // B1 hit: p=1, REPLACE: |T1|=1 == p, not in B2 -> T2 LRU (1) to B2
        assert_eq!(resident(&a), (vec![3], vec![2]));
        assert_eq!(a.target_t1(), 1);
        assert_eq!(a.list_sizes(), (1, 1, 0, 1));
        assert!(!a.get(Key(1))); // B2 hit: p=0, REPLACE(in_b2): |T1|=1 > 0 -> 3 to B1
        assert_eq!(resident(&a), (vec![], vec![1, 2]));
        assert_eq!(a.target_t1(), 0);
        a.check_invariants().unwrap();
    }

    #[test]
    fn scan_does_not_flush_frequent_keys() {
        let mut a = ArcCache::new(4);
        for _ in 0..3 {
            for k in 1..=2 {
                a.get(Key(k));
            }
        }
        for k in 100..200 {
            a.get(Key(k));
        }
        assert!(a.get(Key(1)));
        assert!(a.get(Key(2)));
    }

    proptest! {
        #[test]
        fn list_bounds_hold(cap in 1usize..8, ops in proptest::collection::vec((0u64..24, any::<bool>()), 1..500)) {
            let mut a = ArcCache::new(cap);
            for (k, write) in ops {
                if write { a.invalidate(Key(k)); } else { a.get(Key(k)); }
                a.check_invariants().map_err(TestCaseError::fail)?;
            }
        }
    }
}
