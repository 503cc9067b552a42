//! Simulated back-end: a consistent-hash ring over `M` shards and per-shard
//! lookup counters.
//!
//! Ring positions and key positions are XXH64 with seed 0:
//! a virtual node hashes the 8 bytes `shard as u32 LE ++ vnode as u32 LE`,
//! a key hashes its `u64` in little-endian. A key belongs to the first
//! virtual node at or after its position, wrapping past the top of the ring.

use twox_hash::XxHash64;

use crate::hotness::Key;

pub type ShardId = u32;

/// Virtual nodes per shard unless configured otherwise.
pub const DEFAULT_VNODES: u32 = 100;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClusterError {
    #[error("a ring needs at least one shard")]
    NoShards,
    #[error("a ring needs at least one virtual node per shard")]
    NoVnodes,
    #[error("shard {shard} out of range for {shards} shards")]
    UnknownShard { shard: ShardId, shards: u32 },
    #[error("baseline load is zero")]
    ZeroBaseline,
    #[error("load vectors cover {left} and {right} shards")]
    ShardCountMismatch { left: usize, right: usize },
}

pub fn vnode_position(shard: ShardId, vnode: u32) -> u64 {
    let mut bytes = [0u8; 8];
    bytes[..4].copy_from_slice(&shard.to_le_bytes());
    bytes[4..].copy_from_slice(&vnode.to_le_bytes());
    XxHash64::oneshot(0, &bytes)
}

pub fn key_position(key: Key) -> u64 {
    XxHash64::oneshot(0, &key.0.to_le_bytes())
}

#[derive(Debug, Clone)]
pub struct HashRing {
    shards: u32,
    vnodes: u32,
    /// Sorted by position, then shard.
    points: Vec<(u64, ShardId)>,
}

impl HashRing {
    pub fn new(shards: u32, vnodes: u32) -> Result<Self, ClusterError> {
        if shards == 0 {
            return Err(ClusterError::NoShards);
        }
        if vnodes == 0 {
            return Err(ClusterError::NoVnodes);
        }
        let mut points: Vec<(u64, ShardId)> = (0..shards)
            .flat_map(|s| (0..vnodes).map(move |v| (vnode_position(s, v), s)))
            .collect();
        points.sort_unstable();
        Ok(HashRing { shards, vnodes, points })
    }

    pub fn shards(&self) -> u32 {
        self.shards
    }

    pub fn vnodes(&self) -> u32 {
        self.vnodes
    }

    pub fn points(&self) -> &[(u64, ShardId)] {
        &self.points
    }

    /// Owner of a ring position: clockwise successor with wraparound.
    pub fn shard_at(&self, position: u64) -> ShardId {
        let i = self.points.partition_point(|&(p, _)| p < position);
        self.points.get(i).unwrap_or(&self.points[0]).1
    }

    pub fn shard_for(&self, key: Key) -> ShardId {
        self.shard_at(key_position(key))
    }

    /// The same ring with every virtual node of `shard` removed. Shard ids
    /// are unchanged.
    pub fn without_shard(&self, shard: ShardId) -> Result<Self, ClusterError> {
        if shard >= self.shards {
            return Err(ClusterError::UnknownShard {
                shard,
                shards: self.shards,
            });
        }
        let points: Vec<_> = self.points.iter().copied().filter(|&(_, s)| s != shard).collect();
        if points.is_empty() {
            return Err(ClusterError::NoShards);
        }
        Ok(HashRing {
            shards: self.shards,
            vnodes: self.vnodes,
            points,
        })
    }

    /// Fraction of the 64-bit hash space owned by each shard.
    pub fn arc_fractions(&self) -> Vec<f64> {
        let mut owned = vec![0u128; self.shards as usize];
        let n = self.points.len();
        for i in 0..n {
            let (pos, shard) = self.points[i];
            let prev = if i == 0 { self.points[n - 1].0 } else { self.points[i - 1].0 };
            let arc = if i == 0 {
                (u128::from(u64::MAX) - u128::from(prev)) + u128::from(pos) + 1
            } else {
                u128::from(pos - prev)
            };
            owned[shard as usize] += arc;
        }
        let total = 2f64.powi(64);
        owned.into_iter().map(|a| a as f64 / total).collect()
    }
}

/// Precomputed owners of keys `1..=key_space`; other keys fall back to the ring.
#[derive(Debug, Clone)]
pub struct ShardMap {
    ring: HashRing,
    table: Vec<u16>,
}

impl ShardMap {
    pub fn new(ring: HashRing, key_space: u64) -> Self {
        assert!(ring.shards() <= u32::from(u16::MAX), "too many shards for a compact table");
        let table = (1..=key_space).map(|k| ring.shard_for(Key(k)) as u16).collect();
        ShardMap { ring, table }
    }

    pub fn ring(&self) -> &HashRing {
        &self.ring
    }

    pub fn shards(&self) -> u32 {
        self.ring.shards()
    }

    #[inline]
    pub fn shard_for(&self, key: Key) -> ShardId {
        match key.0.checked_sub(1).and_then(|i| self.table.get(i as usize)) {
            Some(&s) => ShardId::from(s),
            None => self.ring.shard_for(key),
        }
    }
}

/// Forwarded lookups per shard, for the current epoch and the whole run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShardLoad {
    epoch: Vec<u64>,
    cumulative: Vec<u64>,
}

impl ShardLoad {
    pub fn new(shards: u32) -> Self {
        ShardLoad {
            epoch: vec![0; shards as usize],
            cumulative: vec![0; shards as usize],
        }
    }

    pub fn shards(&self) -> usize {
        self.epoch.len()
    }

    #[inline]
    pub fn record(&mut self, shard: ShardId) {
        self.epoch[shard as usize] += 1;
        self.cumulative[shard as usize] += 1;
    }

    pub fn epoch(&self) -> &[u64] {
        &self.epoch
    }

    pub fn cumulative(&self) -> &[u64] {
        &self.cumulative
    }

    pub fn reset_epoch(&mut self) {
        self.epoch.iter_mut().for_each(|c| *c = 0);
    }

    pub fn epoch_total(&self) -> u64 {
        self.epoch.iter().sum()
    }

    pub fn cumulative_total(&self) -> u64 {
        self.cumulative.iter().sum()
    }

    /// Adds another load's counters into this one.
    pub fn merge(&mut self, other: &ShardLoad) -> Result<(), ClusterError> {
        if other.shards() != self.shards() {
            return Err(ClusterError::ShardCountMismatch {
                left: self.shards(),
                right: other.shards(),
            });
        }
        for (a, b) in self.epoch.iter_mut().zip(&other.epoch) {
            *a += b;
        }
        for (a, b) in self.cumulative.iter_mut().zip(&other.cumulative) {
            *a += b;
        }
        Ok(())
    }

    pub fn epoch_imbalance(&self) -> f64 {
        imbalance(&self.epoch)
    }

    pub fn cumulative_imbalance(&self) -> f64 {
        imbalance(&self.cumulative)
    }
}

/// `max / max(1, min)` over per-shard counts; 1.0 for an empty slice.
pub fn imbalance(counts: &[u64]) -> f64 {
    let (Some(&max), Some(&min)) = (counts.iter().max(), counts.iter().min()) else {
        return 1.0;
    };
    if max == 0 {
        return 1.0;
    }
    max as f64 / min.max(1) as f64
}

/// Total forwarded lookups with a cache over total lookups without one.
pub fn relative_server_load(with_cache: &ShardLoad, baseline: &ShardLoad) -> Result<f64, ClusterError> {
    let base = baseline.cumulative_total();
    if base == 0 {
        return Err(ClusterError::ZeroBaseline);
    }
    Ok(with_cache.cumulative_total() as f64 / base as f64)
}
