use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use cot_core::policy::{Lfu, Lru, Lru2, Perfect, Ranking};
use cot_core::{AccessType, Key, ReplacementPolicy, Tracker};
use proptest::prelude::*;

/// Recency list, most recent first.
struct LruOracle {
    cap: usize,
    keys: Vec<u64>,
}

impl LruOracle {
    fn get(&mut self, k: u64) -> bool {
        if let Some(i) = self.keys.iter().position(|&x| x == k) {
            self.keys.remove(i);
            self.keys.insert(0, k);
            return true;
        }
        if self.cap == 0 {
            return false;
        }
        if self.keys.len() == self.cap {
            self.keys.pop();
        }
        self.keys.insert(0, k);
        false
    }
}

/// LRU-2 by linear scans: resident `(key, penultimate, last)`, ghosts most
/// recent first.
struct Lru2Oracle {
    cap: usize,
    hist: usize,
    clock: u64,
    resident: Vec<(u64, u64, u64)>,
    ghosts: VecDeque<(u64, u64, u64)>,
}

impl Lru2Oracle {
    fn retire(&mut self, e: (u64, u64, u64)) {
        if self.hist == 0 {
            return;
        }
        self.ghosts.push_front(e);
        self.ghosts.truncate(self.hist);
    }

    fn get(&mut self, k: u64) -> bool {
        self.clock += 1;
        if let Some(e) = self.resident.iter_mut().find(|e| e.0 == k) {
            *e = (k, e.2, self.clock);
            return true;
        }
        if self.cap == 0 {
            return false;
        }
        let pen = match self.ghosts.iter().position(|e| e.0 == k) {
            Some(i) => self.ghosts.remove(i).unwrap().2,
            None => 0,
        };
        if self.resident.len() == self.cap {
            let i = (0..self.resident.len()).min_by_key(|&i| (self.resident[i].1, self.resident[i].2)).unwrap();
            let victim = self.resident.swap_remove(i);
            self.retire(victim);
        }
        self.resident.push((k, pen, self.clock));
        false
    }

    fn invalidate(&mut self, k: u64) {
        if let Some(i) = self.resident.iter().position(|e| e.0 == k) {
            let e = self.resident.swap_remove(i);
            self.retire(e);
        }
    }
}

fn ops() -> impl Strategy<Value = Vec<(u64, bool)>> {
    proptest::collection::vec((0u64..20, prop::bool::weighted(0.1)), 1..600)
}

proptest! {
    #[test]
    fn lru_matches_recency_list(cap in 0usize..8, stream in ops()) {
        let mut lru = Lru::new(cap);
        let mut oracle = LruOracle { cap, keys: Vec::new() };
        for (k, update) in stream {
            if update {
                lru.invalidate(Key(k));
                oracle.keys.retain(|&x| x != k);
            } else {
                prop_assert_eq!(lru.get(Key(k)), oracle.get(k));
            }
            prop_assert_eq!(lru.len(), oracle.keys.len());
        }
    }

    #[test]
    fn lru2_matches_scan_oracle(cap in 0usize..6, hist in 0usize..10, stream in ops()) {
        let mut lru2 = Lru2::new(cap, hist);
        let mut oracle = Lru2Oracle { cap, hist, clock: 0, resident: Vec::new(), ghosts: VecDeque::new() };
        for (k, update) in stream {
            if update {
                lru2.invalidate(Key(k));
                oracle.invalidate(k);
            } else {
                prop_assert_eq!(lru2.get(Key(k)), oracle.get(k));
            }
            prop_assert_eq!(lru2.len(), oracle.resident.len());
            prop_assert_eq!(lru2.ghost_len(), oracle.ghosts.len());
        }
    }

    #[test]
    fn lfu_never_exceeds_capacity_and_counts_resident_hits(cap in 1usize..6, stream in ops()) {
        let mut lfu = Lfu::new(cap);
        let mut since_admit: HashMap<u64, u64> = HashMap::new();
        for (k, _) in stream {
            let hit = lfu.get(Key(k));
            if hit {
                *since_admit.get_mut(&k).unwrap() += 1;
            } else {
                since_admit.insert(k, 1);
            }
            prop_assert!(lfu.len() <= cap);
            prop_assert_eq!(lfu.frequency(Key(k)), Some(since_admit[&k]));
        }
    }

    #[test]
    fn perfect_hits_depend_only_on_membership(cap in 0usize..10, perm in Just((1u64..=30).collect::<Vec<_>>()).prop_shuffle(), stream in ops()) {
        let ranking: Arc<[Key]> = perm.iter().map(|&k| Key(k)).collect();
        let mut p = Perfect::new(cap, Ranking::Explicit(ranking));
        let top: Vec<u64> = perm[..cap].to_vec();
        for (k, _) in &stream {
            prop_assert_eq!(p.get(Key(*k)), top.contains(k));
        }
        // Replaying the stream backwards changes nothing.
        let forward: usize = stream.iter().filter(|(k, _)| p.get(Key(*k))).count();
        let backward: usize = stream.iter().rev().filter(|(k, _)| p.get(Key(*k))).count();
        prop_assert_eq!(forward, backward);
    }
}

/// Exact counts against the space-saving guarantee for one stream.
fn check_space_saving(stream: &[u64], k: usize) -> Result<(), String> {
    let mut tracker = Tracker::new(k).unwrap();
    let mut truth: HashMap<u64, i64> = HashMap::new();
    for &key in stream {
        tracker.track(Key(key), AccessType::Read);
        *truth.entry(key).or_default() += 1;
    }
    let slack = stream.len() as i64 / k as i64;
    for (key, h, _) in tracker.entries() {
        let t = truth[&key.0];
        if h.0 < t || h.0 > t + slack {
            return Err(format!("key {key}: true {t}, stored {}, slack {slack}", h.0));
        }
    }
    for (&key, &t) in &truth {
        if t > slack && !tracker.contains(Key(key)) {
            return Err(format!("heavy key {key} with count {t} > {slack} not tracked"));
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn space_saving_bounds(n in 1u64..1000, k in 1usize..64, len in 1usize..3000, seed in any::<u64>()) {
        // Skewed enough to produce both heavy and light keys.
        let mut x = seed | 1;
        let stream: Vec<u64> = (0..len)
            .map(|_| {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                let r = (x >> 11) % n;
                r * r / n.max(1)
            })
            .collect();
        prop_assert_eq!(check_space_saving(&stream, k), Ok(()));
    }
}

#[test]
fn lfu_and_lru_pathologies_hand_counted() {
    let mut lru = Lru::new(3);
    let pattern = [1u64, 2, 3, 4, 1, 2, 3, 5, 1, 2, 3, 6];
    let hits = (0..100).flat_map(|_| pattern).filter(|&k| lru.get(Key(k))).count();
    assert_eq!(hits, 0);

    let mut lfu = Lfu::new(3);
    let mut stream = vec![1u64, 1, 2, 2];
    stream.extend((0..).flat_map(|_| [3u64, 4, 5]).take(996));
    let hit_positions: Vec<usize> = stream
        .iter()
        .enumerate()
        .filter(|&(_, &k)| lfu.get(Key(k)))
        .map(|(i, _)| i + 1)
        .collect();
    assert_eq!(hit_positions, vec![2, 4]);
}
