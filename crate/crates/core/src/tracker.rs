//! Space-saving top-K hotness tracker.
//!
//! Holds at most `K` keys in a min-heap ordered by hotness. An untracked key
//! arriving at a full tracker replaces the coldest unpinned key and inherits
//! its counters, so a newcomer starts from the bar it had to clear. Keys the
//! cache currently holds are pinned and never replaced.

use crate::heap::IndexedMinHeap;
use crate::hotness::{AccessType, Hotness, HotnessEntry, HotnessWeights, Key};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrackedKey {
    pub counters: HotnessEntry,
    pub pinned: bool,
}

/// What a single `track` call did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrackOutcome {
    pub hotness: Hotness,
    /// The key was tracked before this access.
    pub was_tracked: bool,
    /// The key replaced to make room, if any.
    pub evicted: Option<Key>,
    /// False only when every tracked key is pinned and the tracker is full;
    /// the access is then scored from zero counters but not retained.
    pub retained: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrackerError {
    #[error("tracker capacity must be at least 1")]
    ZeroCapacity,
    #[error("cannot shrink tracker to {requested} entries: {pinned} keys are pinned")]
    PinnedExceedsCapacity { requested: usize, pinned: usize },
    #[error("tracker size {tracker} must exceed cache size {cache}")]
    TrackerNotLarger { cache: usize, tracker: usize },
}

#[derive(Debug, Clone)]
pub struct Tracker {
    capacity: usize,
    weights: HotnessWeights,
    heap: IndexedMinHeap<Key, Hotness, TrackedKey>,
    pinned: usize,
}

impl Tracker {
    pub fn new(capacity: usize) -> Result<Self, TrackerError> {
        Self::with_weights(capacity, HotnessWeights::default())
    }

    pub fn with_weights(capacity: usize, weights: HotnessWeights) -> Result<Self, TrackerError> {
        if capacity == 0 {
            return Err(TrackerError::ZeroCapacity);
        }
        Ok(Tracker {
            capacity,
            weights,
            heap: IndexedMinHeap::with_capacity(capacity.min(1 << 20)),
            pinned: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.heap.len() >= self.capacity
    }

    pub fn weights(&self) -> HotnessWeights {
        self.weights
    }

    pub fn contains(&self, key: Key) -> bool {
        self.heap.contains(&key)
    }

    pub fn hotness_of(&self, key: Key) -> Option<Hotness> {
        self.heap.get(&key).map(|n| n.priority)
    }

    pub fn counters_of(&self, key: Key) -> Option<HotnessEntry> {
        self.heap.get(&key).map(|n| n.value.counters)
    }

    pub fn pinned_count(&self) -> usize {
        self.pinned
    }

    pub fn is_pinned(&self, key: Key) -> bool {
        self.heap.get(&key).is_some_and(|n| n.value.pinned)
    }

    /// Marks a tracked key as non-evictable. Returns `false` if untracked.
    pub fn pin(&mut self, key: Key) -> bool {
        match self.heap.value_mut(&key) {
            Some(v) => {
                if !v.pinned {
                    v.pinned = true;
                    self.pinned += 1;
                }
                true
            }
            None => false,
        }
    }

    pub fn unpin(&mut self, key: Key) -> bool {
        match self.heap.value_mut(&key) {
            Some(v) => {
                if v.pinned {
                    v.pinned = false;
                    self.pinned -= 1;
                }
                true
            }
            None => false,
        }
    }

    /// Root hotness, or zero when empty.
    pub fn min_hotness(&self) -> Hotness {
        self.heap.peek().map_or(Hotness::ZERO, |n| n.priority)
    }

    /// Tracked keys with their hotness, in heap order.
    pub fn entries(&self) -> impl Iterator<Item = (Key, Hotness, HotnessEntry)> + '_ {
        self.heap.iter().map(|n| (n.key, n.priority, n.value.counters))
    }

    pub fn track_key(&mut self, key: Key, access: AccessType) -> Hotness {
        self.track(key, access).hotness
    }

    pub fn track(&mut self, key: Key, access: AccessType) -> TrackOutcome {
        if let Some(tracked) = self.heap.value_mut(&key) {
            tracked.counters.apply(access);
            let h = tracked.counters.hotness(self.weights);
            self.heap.set_priority(&key, h);
            return TrackOutcome {
                hotness: h,
                was_tracked: true,
                evicted: None,
                retained: true,
            };
        }

        let mut counters = HotnessEntry::default();
        let mut evicted = None;
        if self.is_full() {
            match self.coldest_unpinned() {
                Some(slot) => {
                    let victim = self.heap.remove_at(slot);
                    counters = victim.value.counters;
                    evicted = Some(victim.key);
                }
                None => {
                    counters.apply(access);
                    return TrackOutcome {
                        hotness: counters.hotness(self.weights),
                        was_tracked: false,
                        evicted: None,
                        retained: false,
                    };
                }
            }
        }
        counters.apply(access);
        let h = counters.hotness(self.weights);
        self.heap.push(key, h, TrackedKey { counters, pinned: false });
        TrackOutcome {
            hotness: h,
            was_tracked: false,
            evicted,
            retained: true,
        }
    }

    /// Changes the capacity. Shrinking evicts the coldest unpinned keys.
    pub fn resize(&mut self, new_capacity: usize) -> Result<Vec<Key>, TrackerError> {
        if new_capacity == 0 {
            return Err(TrackerError::ZeroCapacity);
        }
        if new_capacity < self.pinned {
            return Err(TrackerError::PinnedExceedsCapacity {
                requested: new_capacity,
                pinned: self.pinned,
            });
        }
        let mut evicted = Vec::new();
        while self.heap.len() > new_capacity {
            let slot = self
                .coldest_unpinned()
                .expect("more entries than pinned keys implies an unpinned entry");
            evicted.push(self.heap.remove_at(slot).key);
        }
        self.capacity = new_capacity;
        Ok(evicted)
    }

    /// Removes a key regardless of its pin. Returns its counters.
    pub fn forget(&mut self, key: Key) -> Option<HotnessEntry> {
        let node = self.heap.remove(&key)?;
        if node.value.pinned {
            self.pinned -= 1;
        }
        Some(node.value.counters)
    }

    /// Half-life decay: floor-halves every counter and rebuilds the heap.
    pub fn decay_half_life(&mut self) {
        let weights = self.weights;
        self.heap.reprioritize_all(|_, tracked| {
            tracked.counters = tracked.counters.halved();
            tracked.counters.hotness(weights)
        });
    }

    /// Full scan: heap order, index bijection, capacity bound, stored hotness
    /// matching the counters, and the pin count.
    pub fn check_invariants(&self) -> Result<(), String> {
        self.heap.check_invariants()?;
        if self.heap.len() > self.capacity {
            return Err(format!("{} entries exceed capacity {}", self.heap.len(), self.capacity));
        }
        let mut pinned = 0;
        for node in self.heap.iter() {
            if node.priority != node.value.counters.hotness(self.weights) {
                return Err(format!("stale hotness for key {}", node.key));
            }
            pinned += usize::from(node.value.pinned);
        }
        if pinned != self.pinned {
            return Err(format!("pin count {} but {} pinned nodes", self.pinned, pinned));
        }
        Ok(())
    }

    fn coldest_unpinned(&self) -> Option<usize> {
        if self.pinned == 0 {
            return if self.heap.is_empty() { None } else { Some(0) };
        }
        self.heap.min_where(|n| !n.value.pinned)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn read(t: &mut Tracker, k: u64, times: usize) -> Hotness {
        let mut h = Hotness::ZERO;
        for _ in 0..times {
            h = t.track_key(Key(k), AccessType::Read);
        }
        h
    }

    fn snapshot(t: &Tracker) -> HashMap<u64, i64> {
        t.entries().map(|(k, h, _)| (k.0, h.0)).collect()
    }

    const A: u64 = 1;
    const B: u64 = 2;
    const C: u64 = 3;
    const D: u64 = 4;

    #[test]
    fn first_read_into_empty_tracker() {
        let mut t = Tracker::new(2).unwrap();
        assert_eq!(read(&mut t, A, 1), Hotness(1));
        assert_eq!(snapshot(&t), HashMap::from([(A, 1)]));
    }

    #[test]
    fn newcomer_inherits_root_hotness() {
        let mut t = Tracker::new(2).unwrap();
        read(&mut t, A, 1);
        read(&mut t, B, 1);
        let out = t.track(Key(C), AccessType::Read);
        assert_eq!(out.hotness, Hotness(2));
        assert!(!out.was_tracked);
        // Either A or B may go; ties are unordered.
        let evicted = out.evicted.unwrap().0;
        assert!(evicted == A || evicted == B);
        assert_eq!(t.len(), 2);
        assert_eq!(t.hotness_of(Key(C)), Some(Hotness(2)));
    }

    #[test]
    fn tracked_key_skips_replacement() {
        let mut t = Tracker::new(2).unwrap();
        read(&mut t, A, 1);
        read(&mut t, B, 3);
        let out = t.track(Key(A), AccessType::Read);
        assert_eq!(out.hotness, Hotness(2));
        assert_eq!(out.evicted, None);
        assert_eq!(snapshot(&t), HashMap::from([(A, 2), (B, 3)]));
    }

    #[test]
    fn min_hotness_examples() {
        let mut t = Tracker::new(4).unwrap();
        assert_eq!(t.min_hotness(), Hotness(0));
        read(&mut t, A, 1);
        read(&mut t, B, 3);
        assert_eq!(t.min_hotness(), Hotness(1));

        let mut t = Tracker::new(4).unwrap();
        t.track_key(Key(A), AccessType::Update);
        t.track_key(Key(A), AccessType::Update);
        read(&mut t, B, 3);
        assert_eq!(t.min_hotness(), Hotness(-2));
    }

    fn four_entries() -> Tracker {
        let mut t = Tracker::new(4).unwrap();
        read(&mut t, A, 5);
        read(&mut t, B, 1);
        read(&mut t, C, 3);
        read(&mut t, D, 2);
        t
    }

    #[test]
    fn expansion_is_lossless() {
        let mut t = Tracker::new(4).unwrap();
        read(&mut t, A, 2);
        read(&mut t, B, 1);
        let before = snapshot(&t);
        assert!(t.resize(8).unwrap().is_empty());
        assert_eq!(t.capacity(), 8);
        assert_eq!(snapshot(&t), before);
    }

    #[test]
    fn shrink_evicts_coldest() {
        let mut t = four_entries();
        let mut evicted = t.resize(2).unwrap();
        evicted.sort();
        assert_eq!(evicted, vec![Key(B), Key(D)]);
        assert_eq!(snapshot(&t), HashMap::from([(A, 5), (C, 3)]));
        t.check_invariants().unwrap();
    }

    #[test]
    fn shrink_keeps_pinned() {
        let mut t = four_entries();
        t.pin(Key(B));
        t.resize(2).unwrap();
        assert_eq!(snapshot(&t), HashMap::from([(A, 5), (B, 1)]));
        t.check_invariants().unwrap();
    }

    #[test]
    fn shrink_below_pinned_count_is_rejected() {
        let mut t = four_entries();
        t.pin(Key(A));
        t.pin(Key(B));
        t.pin(Key(C));
        assert_eq!(
            t.resize(2),
            Err(TrackerError::PinnedExceedsCapacity { requested: 2, pinned: 3 })
        );
        assert_eq!(t.len(), 4);
        assert_eq!(t.resize(0), Err(TrackerError::ZeroCapacity));
    }

    #[test]
    fn pinned_root_is_not_replaced() {
        let mut t = Tracker::new(2).unwrap();
        read(&mut t, A, 1);
        read(&mut t, B, 5);
        t.pin(Key(A));
        let out = t.track(Key(C), AccessType::Read);
        assert_eq!(out.evicted, Some(Key(B)));
        assert_eq!(out.hotness, Hotness(6));
        assert!(t.contains(Key(A)));
    }

    #[test]
    fn fully_pinned_tracker_does_not_retain() {
        let mut t = Tracker::new(1).unwrap();
        read(&mut t, A, 3);
        t.pin(Key(A));
        let out = t.track(Key(B), AccessType::Read);
        assert!(!out.retained);
        assert_eq!(out.hotness, Hotness(1));
        assert!(!t.contains(Key(B)));
    }

    #[test]
    fn decay_examples() {
        let mut t = Tracker::new(4).unwrap();
        read(&mut t, A, 4);
        t.decay_half_life();
        assert_eq!(t.counters_of(Key(A)), Some(HotnessEntry::new(2, 0)));
        assert_eq!(t.hotness_of(Key(A)), Some(Hotness(2)));

        let mut t = Tracker::new(4).unwrap();
        read(&mut t, A, 3);
        t.track_key(Key(A), AccessType::Update);
        t.decay_half_life();
        assert_eq!(t.counters_of(Key(A)), Some(HotnessEntry::new(1, 0)));
        assert_eq!(t.hotness_of(Key(A)), Some(Hotness(1)));

        let mut t = Tracker::new(4).unwrap();
        t.decay_half_life();
        assert!(t.is_empty());
    }

    #[test]
    fn zero_capacity_is_rejected() {
        assert_eq!(Tracker::new(0).unwrap_err(), TrackerError::ZeroCapacity);
    }

    proptest! {
        #[test]
        fn invariants_hold_under_mixed_ops(
            cap in 1usize..16,
            ops in proptest::collection::vec((0u8..6, 0u64..40), 1..400),
        ) {
            let mut t = Tracker::new(cap).unwrap();
            for (op, k) in ops {
                let key = Key(k);
                match op {
                    0 | 1 => {
                        let before = t.contains(key);
                        let members: Vec<_> = t.entries().map(|e| e.0).collect();
                        t.track_key(key, AccessType::Read);
                        if before {
                            let after: Vec<_> = t.entries().map(|e| e.0).collect();
                            let mut a = members.clone();
                            let mut b = after;
                            a.sort();
                            b.sort();
                            prop_assert_eq!(a, b);
                        }
                    }
                    2 => { t.track_key(key, AccessType::Update); }
                    3 => { if t.pinned_count() + 1 < t.capacity() { t.pin(key); } }
                    4 => { t.unpin(key); }
                    _ => {
                        let target = (k as usize % 16).max(t.pinned_count()).max(1);
                        t.resize(target).unwrap();
                    }
                }
                t.check_invariants().map_err(TestCaseError::fail)?;
            }
        }
    }
}
