//! Keys, access types and the dual-cost hotness score shared by the tracker
//! and the cache.
//!
//! A key's hotness is `reads * read_weight - updates * update_weight`. Reads
//! heat a key, updates cool it, so update-heavy keys can go negative and never
//! outrank read-hot keys. Everything here is integer arithmetic: heap ordering
//! is equality-sensitive and must not drift.

use std::fmt;

/// Opaque key identity. String keys are hashed into this domain by callers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Key(pub u64);

impl From<u64> for Key {
    fn from(id: u64) -> Self {
        Key(id)
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccessType {
    Read,
    Update,
}

/// Signed hotness score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Hotness(pub i64);

impl Hotness {
    pub const ZERO: Hotness = Hotness(0);
    pub const MIN: Hotness = Hotness(i64::MIN);
    pub const MAX: Hotness = Hotness(i64::MAX);

    pub fn value(self) -> i64 {
        self.0
    }
}

impl fmt::Display for Hotness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Read and update weights.
///
/// Weights are non-negative integers. Only the ratio between them matters for
/// ordering, so a rational pair such as `(1/2, 3/4)` is represented exactly by
/// scaling to a common denominator, see [`HotnessWeights::from_ratios`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HotnessWeights {
    pub read: u32,
    pub update: u32,
}

impl Default for HotnessWeights {
    fn default() -> Self {
        HotnessWeights { read: 1, update: 1 }
    }
}

impl HotnessWeights {
    pub fn new(read: u32, update: u32) -> Self {
        HotnessWeights { read, update }
    }

    /// Builds integer weights from `read_num/read_den` and `update_num/update_den`.
    ///
    /// Returns `None` if a denominator is zero or the scaled weights overflow `u32`.
    pub fn from_ratios(read_num: u32, read_den: u32, update_num: u32, update_den: u32) -> Option<Self> {
        if read_den == 0 || update_den == 0 {
            return None;
        }
        let read = u64::from(read_num) * u64::from(update_den);
        let update = u64::from(update_num) * u64::from(read_den);
        let g = gcd(read, update).max(1);
        Some(HotnessWeights {
            read: u32::try_from(read / g).ok()?,
            update: u32::try_from(update / g).ok()?,
        })
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Per-key read and update counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct HotnessEntry {
    pub reads: u64,
    pub updates: u64,
}

impl HotnessEntry {
    pub fn new(reads: u64, updates: u64) -> Self {
        HotnessEntry { reads, updates }
    }

    pub fn hotness(&self, weights: HotnessWeights) -> Hotness {
        hotness(*self, weights)
    }

    pub fn apply(&mut self, access: AccessType) {
        *self = apply_access(*self, access);
    }

    /// Half-life decay: both counters are floor-halved.
    pub fn halved(self) -> Self {
        HotnessEntry {
            reads: self.reads / 2,
            updates: self.updates / 2,
        }
    }
}

/// `reads * read_weight - updates * update_weight`, exact for counters up to
/// 2^40 and weights up to 2^10 (and well beyond, since the product is computed
/// in 128 bits and saturated into `i64`).
pub fn hotness(entry: HotnessEntry, weights: HotnessWeights) -> Hotness {
    let heat = i128::from(entry.reads) * i128::from(weights.read);
    let chill = i128::from(entry.updates) * i128::from(weights.update);
    let h = (heat - chill).clamp(i128::from(i64::MIN), i128::from(i64::MAX));
    Hotness(h as i64)
}

pub fn apply_access(entry: HotnessEntry, access: AccessType) -> HotnessEntry {
    match access {
        AccessType::Read => HotnessEntry {
            reads: entry.reads.saturating_add(1),
            ..entry
        },
        AccessType::Update => HotnessEntry {
            updates: entry.updates.saturating_add(1),
            ..entry
        },
    }
}
