//! Deterministic access-stream generators.
//!
//! Keys are popularity ranks: `Key(1)` is the hottest key. Zipfian sampling
//! is exact, by inverse CDF over a precomputed cumulative table.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded with
//! `seed ^ front_end_id` through `SeedableRng::seed_from_u64`. Both the
//! cipher stream and the seed expansion are value-stable across versions of
//! that crate. Each event consumes exactly two 64-bit words: the first picks
//! the key, the second picks read or update. A word becomes a uniform double
//! in `[0, 1)` from its top 53 bits.

use std::fmt;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::hotness::{AccessType, Key};

/// Fraction of reads in the default mix (99.8% reads, 0.2% updates).
pub const DEFAULT_READ_RATIO: f64 = 0.998;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WorkloadKind {
    Zipfian { skew: f64 },
    Uniform,
    /// `hot_fraction` of accesses go uniformly to keys `1..=hot_keys`, the
    /// rest uniformly to the remaining keys.
    HotSpot { hot_keys: u64, hot_fraction: f64 },
}

impl WorkloadKind {
    /// Short label used in CSV output.
    pub fn label(&self) -> String {
        match self {
            WorkloadKind::Zipfian { skew } => format!("{skew}"),
            WorkloadKind::Uniform => "uniform".to_string(),
            WorkloadKind::HotSpot { hot_keys, hot_fraction } => format!("hotspot-{hot_keys}-{hot_fraction}"),
        }
    }
}

impl fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorkloadKind::Zipfian { skew } => write!(f, "zipfian(s={skew})"),
            WorkloadKind::Uniform => write!(f, "uniform"),
            WorkloadKind::HotSpot { hot_keys, hot_fraction } => {
                write!(f, "hotspot({hot_keys} keys, {hot_fraction})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSpec {
    pub kind: WorkloadKind,
    pub key_space: u64,
    pub read_ratio: f64,
    pub seed: u64,
    pub total_accesses: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorkloadError {
    #[error("key space must be at least 1")]
    EmptyKeySpace,
    #[error("read ratio {0} outside [0, 1]")]
    ReadRatio(f64),
    #[error("zipfian skew {0} must be positive and finite")]
    Skew(f64),
    #[error("hot fraction {0} outside (0, 1)")]
    HotFraction(f64),
    #[error("hot set of {hot} keys must be non-empty and smaller than the key space {key_space}")]
    HotKeys { hot: u64, key_space: u64 },
}

impl WorkloadSpec {
    pub fn zipfian(skew: f64, key_space: u64) -> Self {
        WorkloadSpec {
            kind: WorkloadKind::Zipfian { skew },
            key_space,
            read_ratio: DEFAULT_READ_RATIO,
            seed: 0,
            total_accesses: 0,
        }
    }

    pub fn uniform(key_space: u64) -> Self {
        WorkloadSpec {
            kind: WorkloadKind::Uniform,
            ..Self::zipfian(1.0, key_space)
        }
    }

    pub fn with_read_ratio(mut self, read_ratio: f64) -> Self {
        self.read_ratio = read_ratio;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_total(mut self, total_accesses: u64) -> Self {
        self.total_accesses = total_accesses;
        self
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        if self.key_space == 0 {
            return Err(WorkloadError::EmptyKeySpace);
        }
        if !(0.0..=1.0).contains(&self.read_ratio) {
            return Err(WorkloadError::ReadRatio(self.read_ratio));
        }
        match self.kind {
            WorkloadKind::Zipfian { skew } if !(skew.is_finite() && skew > 0.0) => Err(WorkloadError::Skew(skew)),
            WorkloadKind::HotSpot { hot_fraction, .. } if !(hot_fraction > 0.0 && hot_fraction < 1.0) => {
                Err(WorkloadError::HotFraction(hot_fraction))
            }
            WorkloadKind::HotSpot { hot_keys, .. } if hot_keys == 0 || hot_keys >= self.key_space => {
                Err(WorkloadError::HotKeys {
                    hot: hot_keys,
                    key_space: self.key_space,
                })
            }
            _ => Ok(()),
        }
    }

    /// Probability of each rank, hottest first.
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.key_space as usize;
        match self.kind {
            WorkloadKind::Zipfian { skew } => {
                let weights: Vec<f64> = (1..=n).map(|r| (r as f64).powf(-skew)).collect();
                let total: f64 = weights.iter().sum();
                weights.into_iter().map(|w| w / total).collect()
            }
            WorkloadKind::Uniform => vec![1.0 / n as f64; n],
            WorkloadKind::HotSpot { hot_keys, hot_fraction } => {
                let hot = hot_keys as usize;
                let cold = n - hot;
                (0..n)
                    .map(|i| {
                        if i < hot {
                            hot_fraction / hot as f64
                        } else {
                            (1.0 - hot_fraction) / cold as f64
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Normalized cumulative Zipf weights over ranks `1..=n`.
#[derive(Debug, Clone)]
pub struct ZipfTable {
    skew: f64,
    cdf: Vec<f64>,
}

impl ZipfTable {
    pub fn new(key_space: u64, skew: f64) -> Self {
        let n = key_space as usize;
        let mut cdf = Vec::with_capacity(n);
        let mut acc = 0.0f64;
        for r in 1..=n {
            acc += (r as f64).powf(-skew);
            cdf.push(acc);
        }
        let total = acc;
        for c in &mut cdf {
            *c /= total;
        }
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        ZipfTable { skew, cdf }
    }

    pub fn skew(&self) -> f64 {
        self.skew
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    /// Mass of the top `c` ranks.
    pub fn cdf(&self, c: usize) -> f64 {
        if c == 0 {
            0.0
        } else {
            self.cdf[c.min(self.cdf.len()) - 1]
        }
    }

    /// Rank (1-based) for a uniform draw in `[0, 1)`.
    pub fn rank_for(&self, u: f64) -> u64 {
        let idx = self.cdf.partition_point(|&c| c <= u);
        (idx.min(self.cdf.len() - 1) + 1) as u64
    }
}

/// `sum_{r<=c} r^-s / sum_{r<=n} r^-s`.
pub fn zipf_cdf(key_space: u64, skew: f64, capacity: u64) -> f64 {
    let c = capacity.min(key_space);
    let mut head = 0.0f64;
    let mut total = 0.0f64;
    for r in 1..=key_space {
        let w = (r as f64).powf(-skew);
        total += w;
        if r == c {
            head = total;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        head / total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccessEvent {
    pub key: Key,
    pub access: AccessType,
}

#[derive(Debug, Clone)]
enum KeySampler {
    Zipf(Arc<ZipfTable>),
    Uniform { n: u64 },
    HotSpot { hot: u64, cold: u64, fraction: f64 },
}

/// Precomputed sampling state for a spec, shareable across front-ends.
#[derive(Debug, Clone)]
pub struct Sampler {
    keys: KeySampler,
    read_ratio: f64,
}

impl Sampler {
    pub fn new(spec: &WorkloadSpec) -> Result<Self, WorkloadError> {
        spec.validate()?;
        let keys = match spec.kind {
            WorkloadKind::Zipfian { skew } => KeySampler::Zipf(Arc::new(ZipfTable::new(spec.key_space, skew))),
            WorkloadKind::Uniform => KeySampler::Uniform { n: spec.key_space },
            WorkloadKind::HotSpot { hot_keys, hot_fraction } => KeySampler::HotSpot {
                hot: hot_keys,
                cold: spec.key_space - hot_keys,
                fraction: hot_fraction,
            },
        };
        Ok(Sampler {
            keys,
            read_ratio: spec.read_ratio,
        })
    }

    /// A generator for one front-end, seeded with `seed ^ front_end`.
    pub fn generator(&self, seed: u64, front_end: u64) -> Generator {
        Generator {
            sampler: self.clone(),
            rng: ChaCha8Rng::seed_from_u64(seed ^ front_end),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> AccessEvent {
        let key_word = rng.next_u64();
        let type_word = rng.next_u64();
        let rank = match &self.keys {
            KeySampler::Zipf(table) => table.rank_for(unit(key_word)),
            KeySampler::Uniform { n } => 1 + below(key_word, *n),
            KeySampler::HotSpot { hot, cold, fraction } => {
                // One word drives both the hot/cold split and the key.
                let u = unit(key_word);
                if u < *fraction {
                    1 + ((u / fraction * *hot as f64) as u64).min(hot - 1)
                } else {
                    let v = (u - fraction) / (1.0 - fraction);
                    hot + 1 + ((v * *cold as f64) as u64).min(cold - 1)
                }
            }
        };
        let access = if unit(type_word) < self.read_ratio {
            AccessType::Read
        } else {
            AccessType::Update
        };
        AccessEvent { key: Key(rank), access }
    }
}

/// Infinite event stream for one front-end.
#[derive(Debug, Clone)]
pub struct Generator {
    sampler: Sampler,
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn next_event(&mut self) -> AccessEvent {
        self.sampler.draw(&mut self.rng)
    }

    /// Keeps the random stream but draws from another distribution from now on.
    pub fn switch(&mut self, sampler: Sampler) {
        self.sampler = sampler;
    }
}

impl Iterator for Generator {
    type Item = AccessEvent;

    fn next(&mut self) -> Option<AccessEvent> {
        Some(self.next_event())
    }
}

fn unit(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Multiply-shift reduction of a 64-bit word onto `[0, n)`.
fn below(word: u64, n: u64) -> u64 {
    ((u128::from(word) * u128::from(n)) >> 64) as u64
}
