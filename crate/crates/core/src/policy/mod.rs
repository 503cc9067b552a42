//! Replacement policies behind one interface: LRU, LFU, ARC, LRU-2, the
//! theoretical perfect cache, and CoT itself.

mod arc;
mod list;
mod lfu;
mod lru;
mod lru2;
mod perfect;

use std::convert::Infallible;
use std::fmt;
use std::str::FromStr;

pub use self::arc::ArcCache;
pub use self::lfu::Lfu;
pub use self::list::KeyList;
pub use self::lru::Lru;
pub use self::lru2::{AccessHistory, Lru2};
pub use self::perfect::{Perfect, Ranking};

use crate::cot::CotCache;
use crate::hotness::{AccessType, Key};
use crate::tracker::TrackerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    Lru,
    Lfu,
    Arc,
    Lru2,
    Perfect,
    Cot,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Lru,
        PolicyKind::Lfu,
        PolicyKind::Arc,
        PolicyKind::Lru2,
        PolicyKind::Perfect,
        PolicyKind::Cot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Lru => "LRU",
            PolicyKind::Lfu => "LFU",
            PolicyKind::Arc => "ARC",
            PolicyKind::Lru2 => "LRU2",
            PolicyKind::Perfect => "TPC",
            PolicyKind::Cot => "CoT",
        }
    }

    /// Whether the policy keeps metadata beyond its resident set.
    pub fn uses_tracker(self) -> bool {
        matches!(self, PolicyKind::Cot | PolicyKind::Lru2)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lru" => Ok(PolicyKind::Lru),
            "lfu" => Ok(PolicyKind::Lfu),
            "arc" => Ok(PolicyKind::Arc),
            "lru2" | "lru-2" => Ok(PolicyKind::Lru2),
            "perfect" | "tpc" => Ok(PolicyKind::Perfect),
            "cot" => Ok(PolicyKind::Cot),
            other => Err(format!("unknown policy `{other}`")),
        }
    }
}

/// Construction parameters shared by every policy.
#[derive(Debug, Clone)]
pub struct PolicyConfig {
    pub capacity: usize,
    /// CoT tracker size, or the LRU-2 ghost-history size.
    pub history_size: usize,
    /// Ranking used by the perfect cache.
    pub ranking: Ranking,
}

impl PolicyConfig {
    pub fn new(capacity: usize) -> Self {
        PolicyConfig {
            capacity,
            history_size: 0,
            ranking: Ranking::KeyIsRank,
        }
    }

    pub fn with_history(mut self, history_size: usize) -> Self {
        self.history_size = history_size;
        self
    }

    pub fn with_ranking(mut self, ranking: Ranking) -> Self {
        self.ranking = ranking;
        self
    }
}

pub trait ReplacementPolicy: Send {
    fn kind(&self) -> PolicyKind;

    fn capacity(&self) -> usize;

    /// Resident keys.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// A read. Returns `true` on a hit; on a miss the key is fetched and
    /// admitted as the policy sees fit.
    fn get(&mut self, key: Key) -> bool;

    /// Drops the local copy of `key`. Returns whether it was resident.
    fn invalidate(&mut self, key: Key) -> bool;

    /// A read or a write. Writes invalidate and never hit.
    fn access(&mut self, key: Key, access: AccessType) -> bool {
        match access {
            AccessType::Read => self.get(key),
            AccessType::Update => {
                self.invalidate(key);
                false
            }
        }
    }
}

/// Read access through any policy.
pub fn policy_access(policy: &mut dyn ReplacementPolicy, key: Key) -> bool {
    policy.get(key)
}

/// CoT behind the common policy interface, with unit values.
#[derive(Debug, Clone)]
pub struct CotPolicy {
    cache: CotCache<()>,
}

impl CotPolicy {
    pub fn new(cache_lines: usize, tracker_lines: usize) -> Result<Self, TrackerError> {
        Ok(CotPolicy {
            cache: CotCache::new(cache_lines, tracker_lines)?,
        })
    }

    pub fn cache(&self) -> &CotCache<()> {
        &self.cache
    }
}

impl ReplacementPolicy for CotPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Cot
    }

    fn capacity(&self) -> usize {
        self.cache.capacity()
    }

    fn len(&self) -> usize {
        self.cache.len()
    }

    fn get(&mut self, key: Key) -> bool {
        self.access(key, AccessType::Read)
    }

    fn invalidate(&mut self, key: Key) -> bool {
        self.cache.invalidate(key)
    }

    fn access(&mut self, key: Key, access: AccessType) -> bool {
        let out = self
            .cache
            .serve(key, access, |_| Ok::<(), Infallible>(()))
            .unwrap_or_else(|e| match e {});
        out.cache_hit
    }
}

/// Builds a boxed policy. For CoT, `history_size` is the tracker size and
/// must exceed the capacity; a zero-capacity CoT gets a one-line tracker.
pub fn build_policy(kind: PolicyKind, config: &PolicyConfig) -> Result<Box<dyn ReplacementPolicy>, TrackerError> {
    let c = config.capacity;
    Ok(match kind {
        PolicyKind::Lru => Box::new(Lru::new(c)),
        PolicyKind::Lfu => Box::new(Lfu::new(c)),
        PolicyKind::Arc => Box::new(ArcCache::new(c)),
        PolicyKind::Lru2 => Box::new(Lru2::new(c, config.history_size)),
        PolicyKind::Perfect => Box::new(Perfect::new(c, config.ranking.clone())),
        PolicyKind::Cot => Box::new(CotPolicy::new(c, config.history_size.max(c + 1))?),
    })
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistributionError {
    #[error("probabilities sum to {0}, expected 1 within 1e-9")]
    NotNormalized(f64),
    #[error("negative or non-finite probability")]
    InvalidProbability,
}

/// Hit rate of a cache that always holds the `capacity` most probable keys:
/// the summed mass of the top `capacity` probabilities.
pub fn tpc_hit_rate(probabilities: &[f64], capacity: usize) -> Result<f64, DistributionError> {
    if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(DistributionError::InvalidProbability);
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(DistributionError::NotNormalized(total));
    }
    let mut sorted = probabilities.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(sorted.iter().take(capacity).sum::<f64>().min(1.0))
}
