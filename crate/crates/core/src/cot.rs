//! The CoT front-end cache.
//!
//! Every access is first recorded by the [`Tracker`]. A cached key is served
//! locally; anything else goes to the back-end and is admitted only if its
//! hotness strictly exceeds `h_min`, the hotness of the coldest cached key.
//! While the cache has free lines, any tracked key is admitted. Admission
//! into a full cache evicts the coldest cached key, which stays tracked.
//!
//! Cached keys are pinned in the tracker, so the cached set is always a subset
//! of the tracked set. Updates invalidate: the key is dropped from the cache
//! and the write is forwarded.

use crate::heap::IndexedMinHeap;
use crate::hotness::{AccessType, Hotness, HotnessWeights, Key};
use crate::tracker::{Tracker, TrackerError};

/// The result of serving one access.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServeOutcome<V> {
    /// The value read; `None` for updates.
    pub value: Option<V>,
    pub cache_hit: bool,
    /// The key was tracked before this access (cached keys included).
    pub tracker_hit: bool,
    /// The key was inserted into the cache by this access.
    pub promoted: bool,
    /// A back-end request was issued.
    pub forwarded: bool,
    /// A cached key displaced by the promotion.
    pub evicted: Option<Key>,
}

impl<V> ServeOutcome<V> {
    /// Tracked but not cached before this access.
    pub fn tracker_only_hit(&self) -> bool {
        self.tracker_hit && !self.cache_hit
    }
}

#[derive(Debug, Clone)]
pub struct CotCache<V> {
    capacity: usize,
    cached: IndexedMinHeap<Key, Hotness, V>,
    tracker: Tracker,
}

impl<V: Clone> CotCache<V> {
    /// A cache of `cache_lines` backed by a tracker of `tracker_lines`.
    /// The tracker must be strictly larger than the cache.
    pub fn new(cache_lines: usize, tracker_lines: usize) -> Result<Self, TrackerError> {
        Self::with_weights(cache_lines, tracker_lines, HotnessWeights::default())
    }

    pub fn with_weights(
        cache_lines: usize,
        tracker_lines: usize,
        weights: HotnessWeights,
    ) -> Result<Self, TrackerError> {
        if tracker_lines <= cache_lines {
            return Err(TrackerError::TrackerNotLarger {
                cache: cache_lines,
                tracker: tracker_lines,
            });
        }
        Ok(CotCache {
            capacity: cache_lines,
            cached: IndexedMinHeap::with_capacity(cache_lines.min(1 << 20)),
            tracker: Tracker::with_weights(tracker_lines, weights)?,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn tracker_capacity(&self) -> usize {
        self.tracker.capacity()
    }

    pub fn len(&self) -> usize {
        self.cached.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cached.is_empty()
    }

    pub fn tracker(&self) -> &Tracker {
        &self.tracker
    }

    pub fn contains(&self, key: Key) -> bool {
        self.cached.contains(&key)
    }

    /// The admission bar. `Hotness::MIN` while the cache has free lines.
    pub fn h_min(&self) -> Hotness {
        if self.cached.len() < self.capacity {
            Hotness::MIN
        } else {
            self.cached.peek().map_or(Hotness::MAX, |n| n.priority)
        }
    }

    pub fn cached_keys(&self) -> impl Iterator<Item = (Key, Hotness)> + '_ {
        self.cached.iter().map(|n| (n.key, n.priority))
    }

    /// Serves one access. `backend` is consulted on read misses only; its
    /// error is returned unchanged, with the access already recorded by the
    /// tracker and the cache untouched.
    pub fn serve<E>(
        &mut self,
        key: Key,
        access: AccessType,
        backend: impl FnOnce(Key) -> Result<V, E>,
    ) -> Result<ServeOutcome<V>, E> {
        let tracked = self.tracker.track(key, access);
        let was_cached = self.cached.contains(&key);

        if access == AccessType::Update {
            if was_cached {
                self.drop_cached(key);
            }
            return Ok(ServeOutcome {
                value: None,
                cache_hit: false,
                tracker_hit: tracked.was_tracked,
                promoted: false,
                forwarded: true,
                evicted: None,
            });
        }

        if was_cached {
            self.cached.set_priority(&key, tracked.hotness);
            let value = self.cached.get(&key).map(|n| n.value.clone());
            return Ok(ServeOutcome {
                value,
                cache_hit: true,
                tracker_hit: true,
                promoted: false,
                forwarded: false,
                evicted: None,
            });
        }

        let value = backend(key)?;
        let mut promoted = false;
        let mut evicted = None;
        if tracked.retained && self.capacity > 0 && tracked.hotness > self.h_min() {
            if self.cached.len() >= self.capacity {
                let victim = self.cached.pop().expect("full cache has a root");
                self.tracker.unpin(victim.key);
                evicted = Some(victim.key);
            }
            self.cached.push(key, tracked.hotness, value.clone());
            self.tracker.pin(key);
            promoted = true;
        }
        Ok(ServeOutcome {
            value: Some(value),
            cache_hit: false,
            tracker_hit: tracked.was_tracked,
            promoted,
            forwarded: true,
            evicted,
        })
    }

    /// Removes `key` from the cache (it stays tracked).
    pub fn invalidate(&mut self, key: Key) -> bool {
        self.drop_cached(key)
    }

    /// Changes the cache size. Shrinking evicts the coldest cached keys,
    /// which remain tracked. The tracker must stay larger than the cache.
    pub fn resize_cache(&mut self, new_capacity: usize) -> Result<Vec<Key>, TrackerError> {
        if new_capacity >= self.tracker.capacity() {
            return Err(TrackerError::TrackerNotLarger {
                cache: new_capacity,
                tracker: self.tracker.capacity(),
            });
        }
        let mut evicted = Vec::new();
        while self.cached.len() > new_capacity {
            let victim = self.cached.pop().expect("non-empty");
            self.tracker.unpin(victim.key);
            evicted.push(victim.key);
        }
        self.capacity = new_capacity;
        Ok(evicted)
    }

    /// Changes the tracker size. It must stay larger than the cache size.
    pub fn resize_tracker(&mut self, new_capacity: usize) -> Result<Vec<Key>, TrackerError> {
        if new_capacity <= self.capacity {
            return Err(TrackerError::TrackerNotLarger {
                cache: self.capacity,
                tracker: new_capacity,
            });
        }
        self.tracker.resize(new_capacity)
    }

    /// Resizes both, ordering the two steps so the tracker always stays
    /// larger than the cache.
    pub fn resize(&mut self, cache_lines: usize, tracker_lines: usize) -> Result<(), TrackerError> {
        if tracker_lines <= cache_lines {
            return Err(TrackerError::TrackerNotLarger {
                cache: cache_lines,
                tracker: tracker_lines,
            });
        }
        if tracker_lines >= self.tracker.capacity() {
            self.tracker.resize(tracker_lines)?;
            self.resize_cache(cache_lines)?;
        } else {
            if cache_lines < self.capacity {
                self.resize_cache(cache_lines)?;
            }
            self.tracker.resize(tracker_lines)?;
            self.resize_cache(cache_lines)?;
        }
        Ok(())
    }

    /// Half-life decay of every tracked key; cached hotness follows.
    pub fn decay_half_life(&mut self) {
        self.tracker.decay_half_life();
        let tracker = &self.tracker;
        self.cached
            .reprioritize_all(|k, _| tracker.hotness_of(*k).expect("cached keys are tracked"));
    }

    /// Full scan of the cache invariants. Test support.
    pub fn check_invariants(&self) -> Result<(), String> {
        self.cached.check_invariants()?;
        self.tracker.check_invariants()?;
        if self.cached.len() > self.capacity {
            return Err(format!("{} cached keys exceed capacity {}", self.cached.len(), self.capacity));
        }
        if self.tracker.pinned_count() != self.cached.len() {
            return Err(format!(
                "{} pinned tracker keys but {} cached keys",
                self.tracker.pinned_count(),
                self.cached.len()
            ));
        }
        for node in self.cached.iter() {
            match self.tracker.hotness_of(node.key) {
                None => return Err(format!("cached key {} is not tracked", node.key)),
                Some(h) if h != node.priority => {
                    return Err(format!("cached key {} hotness {} != tracked {}", node.key, node.priority, h))
                }
                Some(_) if !self.tracker.is_pinned(node.key) => {
                    return Err(format!("cached key {} is not pinned", node.key))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    fn drop_cached(&mut self, key: Key) -> bool {
        if self.cached.remove(&key).is_some() {
            self.tracker.unpin(key);
            true
        } else {
            false
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    const A: Key = Key(1);
    const B: Key = Key(2);
    const C: Key = Key(3);

    fn fetch(k: Key) -> Result<u64, Infallible> {
        Ok(k.0 * 10)
    }

    fn read(c: &mut CotCache<u64>, k: Key) -> ServeOutcome<u64> {
        c.serve(k, AccessType::Read, fetch).unwrap()
    }

    /// Builds C=1, K=2 with A cached at hotness 3 and B tracked at `b`.
    fn a3_with_b(b: usize) -> CotCache<u64> {
        let mut c = CotCache::new(1, 2).unwrap();
        for _ in 0..3 {
            read(&mut c, A);
        }
        for _ in 0..b {
            let out = read(&mut c, B);
            assert!(!out.promoted);
        }
        assert!(c.contains(A));
        assert_eq!(c.h_min(), Hotness(3));
        c
    }

    #[test]
    fn not_full_cache_admits_any_tracked_key() {
        let mut c: CotCache<u64> = CotCache::new(1, 2).unwrap();
        // Tracker {A:3} without A cached.
        for _ in 0..3 {
            c.tracker.track(A, AccessType::Read);
        }
        let out = read(&mut c, B);
        assert!(!out.cache_hit);
        assert!(out.promoted);
        assert!(out.forwarded);
        assert_eq!(out.value, Some(20));
        assert!(c.contains(B));
        assert_eq!(c.tracker().hotness_of(B), Some(Hotness(1)));
        c.check_invariants().unwrap();
    }

    #[test]
    fn equal_hotness_does_not_displace() {
        let mut c = a3_with_b(2);
        let out = read(&mut c, B);
        assert_eq!(c.tracker().hotness_of(B), Some(Hotness(3)));
        assert!(!out.promoted);
        assert!(out.forwarded);
        assert!(out.tracker_only_hit());
        assert!(c.contains(A));
    }

    #[test]
    fn hotter_tracked_key_displaces_root() {
        let mut c = a3_with_b(3);
        let out = read(&mut c, B);
        assert_eq!(c.tracker().hotness_of(B), Some(Hotness(4)));
        assert!(out.promoted);
        assert_eq!(out.evicted, Some(A));
        assert!(c.contains(B));
        assert!(!c.contains(A));
        assert!(c.tracker().contains(A));
        c.check_invariants().unwrap();
    }

    #[test]
    fn cache_hit_serves_locally() {
        let mut c = a3_with_b(0);
        let out = read(&mut c, A);
        assert!(out.cache_hit && !out.forwarded && !out.promoted);
        assert_eq!(out.value, Some(10));
        assert_eq!(c.h_min(), Hotness(4));
    }

    #[test]
    fn invalidate_examples() {
        let mut c: CotCache<u64> = CotCache::new(2, 4).unwrap();
        read(&mut c, A);
        assert!(c.invalidate(A));
        assert!(c.is_empty());
        assert!(c.tracker().contains(A));

        read(&mut c, A);
        assert!(!c.invalidate(B));
        assert_eq!(c.len(), 1);

        read(&mut c, B);
        assert!(c.invalidate(A));
        assert!(!c.invalidate(A));
        c.check_invariants().unwrap();
    }

    #[test]
    fn update_invalidates_and_forwards() {
        let mut c: CotCache<u64> = CotCache::new(2, 4).unwrap();
        read(&mut c, A);
        read(&mut c, A);
        let out = c.serve(A, AccessType::Update, fetch).unwrap();
        assert!(out.forwarded && !out.cache_hit && out.value.is_none());
        assert!(!c.contains(A));
        assert_eq!(c.tracker().hotness_of(A), Some(Hotness(1)));

        // Untracked updates are tracked too and start below zero.
        c.serve(C, AccessType::Update, fetch).unwrap();
        assert_eq!(c.tracker().hotness_of(C), Some(Hotness(-1)));
        c.check_invariants().unwrap();
    }

    #[test]
    fn resize_cache_examples() {
        let mut c: CotCache<u64> = CotCache::new(3, 8).unwrap();
        for (k, n) in [(A, 5), (B, 2), (C, 3)] {
            for _ in 0..n {
                read(&mut c, k);
            }
        }
        let evicted = c.resize_cache(1).unwrap();
        assert_eq!(evicted, vec![B, C]);
        assert_eq!(c.cached_keys().collect::<Vec<_>>(), vec![(A, Hotness(5))]);
        assert!(c.tracker().contains(B) && c.tracker().contains(C));

        assert!(c.resize_cache(7).unwrap().is_empty());
        assert_eq!(c.cached_keys().collect::<Vec<_>>(), vec![(A, Hotness(5))]);
        c.check_invariants().unwrap();
    }

    #[test]
    fn zero_capacity_always_forwards() {
        let mut c: CotCache<u64> = CotCache::new(2, 4).unwrap();
        c.resize_cache(0).unwrap();
        assert!(c.is_empty());
        for _ in 0..10 {
            let out = read(&mut c, A);
            assert!(out.forwarded && !out.promoted);
        }
    }

    #[test]
    fn backend_failure_leaves_cache_untouched() {
        let mut c: CotCache<u64> = CotCache::new(1, 4).unwrap();
        let err = c.serve(A, AccessType::Read, |_| Err::<u64, _>("down")).unwrap_err();
        assert_eq!(err, "down");
        assert!(c.is_empty());
        assert_eq!(c.tracker().hotness_of(A), Some(Hotness(1)));
        c.check_invariants().unwrap();
    }

    #[test]
    fn resize_both_keeps_tracker_larger() {
        let mut c: CotCache<u64> = CotCache::new(4, 8).unwrap();
        for k in 0..20 {
            read(&mut c, Key(k % 7));
        }
        c.resize(1, 2).unwrap();
        c.check_invariants().unwrap();
        c.resize(16, 64).unwrap();
        c.check_invariants().unwrap();
        assert!(c.resize(4, 4).is_err());
        assert!(CotCache::<u64>::new(4, 4).is_err());
    }

    #[test]
    fn decay_keeps_cache_in_sync() {
        let mut c: CotCache<u64> = CotCache::new(2, 4).unwrap();
        for _ in 0..5 {
            read(&mut c, A);
        }
        read(&mut c, B);
        c.decay_half_life();
        c.check_invariants().unwrap();
        assert_eq!(c.tracker().hotness_of(A), Some(Hotness(2)));
    }
}
