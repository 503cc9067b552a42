//! Epoch-driven controller that sizes a CoT cache and its tracker.
//!
//! The controller is a pure decision function: it reads one epoch's signals
//! and returns the sizes the caller should apply. It runs in three phases.
//!
//! * `RatioDiscovery` holds the cache fixed and doubles the tracker while the
//!   hits per cache line keep improving, then undoes the last doubling.
//! * `ImbalanceSearch` doubles cache and tracker until the back-end
//!   imbalance meets its target, then records the target hits per line.
//! * `Steady` watches for drift: imbalance above target grows again, hits
//!   per line dropping on both the cache and the rest of the tracker
//!   shrinks, hits dropping only on the cache decays the tracker counters.
//!
//! Every non-`Hold` action is followed by a warm-up of several epochs during
//! which the controller only holds.

use std::fmt;
use std::str::FromStr;

use crate::cluster::imbalance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochStats {
    pub epoch: u64,
    pub accesses: u64,
    pub cache_hits: u64,
    /// Accesses whose key was tracked but not cached beforehand.
    pub tracker_only_hits: u64,
    /// Forwarded lookups per shard.
    pub shard_lookups: Vec<u64>,
    pub cache_lines: usize,
    pub tracker_lines: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedSignals {
    pub imbalance: f64,
    pub alpha_c: f64,
    pub alpha_kc: f64,
}

/// `I_c = max / max(1, min)` over shard lookups, hits per cache line, and
/// hits per tracked-but-uncached line. A zero-sized denominator yields 0.
pub fn derive_signals(stats: &EpochStats) -> DerivedSignals {
    let per_line = |hits: u64, lines: usize| if lines == 0 { 0.0 } else { hits as f64 / lines as f64 };
    DerivedSignals {
        imbalance: imbalance(&stats.shard_lookups),
        alpha_c: per_line(stats.cache_hits, stats.cache_lines),
        alpha_kc: per_line(
            stats.tracker_only_hits,
            stats.tracker_lines.saturating_sub(stats.cache_lines),
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    RatioDiscovery,
    ImbalanceSearch,
    Steady,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::RatioDiscovery => "RatioDiscovery",
            Phase::ImbalanceSearch => "ImbalanceSearch",
            Phase::Steady => "Steady",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionKind {
    DoubleBoth,
    HalveBoth,
    DoubleTracker,
    ShrinkTrackerBack,
    Decay,
    Hold,
}

impl ActionKind {
    pub fn name(self) -> &'static str {
        match self {
            ActionKind::DoubleBoth => "DoubleBoth",
            ActionKind::HalveBoth => "HalveBoth",
            ActionKind::DoubleTracker => "DoubleTracker",
            ActionKind::ShrinkTrackerBack => "ShrinkTrackerBack",
            ActionKind::Decay => "Decay",
            ActionKind::Hold => "Hold",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A decision and the sizes that hold after applying it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResizeAction {
    pub kind: ActionKind,
    pub cache_lines: usize,
    pub tracker_lines: usize,
    pub epoch_size: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResizerConfig {
    pub target_imbalance: f64,
    pub epsilon: f64,
    /// Relative tolerance around the imbalance target.
    pub band: f64,
    pub warmup_epochs: u32,
    /// Minimum relative gain in hits per line that justifies another tracker doubling.
    pub gain_threshold: f64,
    pub min_cache: usize,
    pub min_tracker: usize,
    pub max_cache: usize,
    /// Upper bound on tracker lines per cache line during ratio discovery.
    pub max_ratio: usize,
    pub initial_cache: usize,
    pub initial_tracker: usize,
    pub initial_epoch: u64,
}

impl Default for ResizerConfig {
    fn default() -> Self {
        ResizerConfig {
            target_imbalance: 1.1,
            epsilon: 0.05,
            band: 0.02,
            warmup_epochs: 5,
            gain_threshold: 0.05,
            min_cache: 1,
            min_tracker: 2,
            max_cache: 1 << 24,
            max_ratio: 64,
            initial_cache: 2,
            initial_tracker: 4,
            initial_epoch: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ResizerError {
    #[error("target imbalance {0} must exceed 1")]
    Target(f64),
    #[error("epsilon {0} outside (0, 1)")]
    Epsilon(f64),
    #[error("band {0} must be non-negative and finite")]
    Band(f64),
    #[error("gain threshold {0} must be positive and finite")]
    Gain(f64),
    #[error("size floors must satisfy 1 <= min_cache and 2 * min_cache <= min_tracker (got {cache}, {tracker})")]
    Floors { cache: usize, tracker: usize },
    #[error("initial sizes must satisfy floors and tracker >= 2 * cache (got cache {cache}, tracker {tracker})")]
    Initial { cache: usize, tracker: usize },
    #[error("max_ratio must be at least 2")]
    Ratio,
    #[error("max_cache {0} is below the initial cache size")]
    MaxCache(usize),
    #[error("epoch size must be positive")]
    Epoch,
}

impl ResizerConfig {
    pub fn validate(&self) -> Result<(), ResizerError> {
        if !(self.target_imbalance.is_finite() && self.target_imbalance > 1.0) {
            return Err(ResizerError::Target(self.target_imbalance));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(ResizerError::Epsilon(self.epsilon));
        }
        if !(self.band.is_finite() && self.band >= 0.0) {
            return Err(ResizerError::Band(self.band));
        }
        if !(self.gain_threshold.is_finite() && self.gain_threshold > 0.0) {
            return Err(ResizerError::Gain(self.gain_threshold));
        }
        if self.min_cache == 0 || self.min_tracker < 2 * self.min_cache {
            return Err(ResizerError::Floors {
                cache: self.min_cache,
                tracker: self.min_tracker,
            });
        }
        if self.max_ratio < 2 {
            return Err(ResizerError::Ratio);
        }
        if self.initial_cache < self.min_cache
            || self.initial_tracker < self.min_tracker
            || self.initial_tracker < 2 * self.initial_cache
        {
            return Err(ResizerError::Initial {
                cache: self.initial_cache,
                tracker: self.initial_tracker,
            });
        }
        if self.max_cache < self.initial_cache {
            return Err(ResizerError::MaxCache(self.max_cache));
        }
        if self.initial_epoch == 0 {
            return Err(ResizerError::Epoch);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResizerState {
    config: ResizerConfig,
    phase: Phase,
    cache_lines: usize,
    tracker_lines: usize,
    epoch_size: u64,
    alpha_target: f64,
    /// Set by a growth step; the next epoch that meets the imbalance target
    /// re-records `alpha_target`.
    alpha_pending: bool,
    warmup_remaining: u32,
    last_alpha_c: Option<f64>,
    /// The first shrink after a growth step resets the ratio to 2:1 and
    /// rediscovers it; later shrinks keep the ratio.
    rediscover_on_shrink: bool,
}

impl ResizerState {
    pub fn new(config: ResizerConfig) -> Result<Self, ResizerError> {
        config.validate()?;
        let epoch_size = config.initial_epoch.max(config.initial_tracker as u64);
        Ok(ResizerState {
            phase: Phase::RatioDiscovery,
            cache_lines: config.initial_cache,
            tracker_lines: config.initial_tracker,
            epoch_size,
            alpha_target: 0.0,
            alpha_pending: false,
            warmup_remaining: config.warmup_epochs,
            last_alpha_c: None,
            rediscover_on_shrink: false,
            config,
        })
    }

    pub fn config(&self) -> &ResizerConfig {
        &self.config
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn cache_lines(&self) -> usize {
        self.cache_lines
    }

    pub fn tracker_lines(&self) -> usize {
        self.tracker_lines
    }

    pub fn epoch_size(&self) -> u64 {
        self.epoch_size
    }

    pub fn alpha_target(&self) -> f64 {
        self.alpha_target
    }

    pub fn warmup_remaining(&self) -> u32 {
        self.warmup_remaining
    }

    /// Whether `access_count` closes an epoch.
    pub fn epoch_boundary(&self, access_count: u64) -> bool {
        epoch_boundary(access_count, self.epoch_size)
    }

    /// Decides what to do after an epoch.
    pub fn end_epoch(&mut self, signals: &DerivedSignals) -> ResizeAction {
        if self.warmup_remaining > 0 {
            self.warmup_remaining -= 1;
            return self.action(ActionKind::Hold);
        }
        let over = signals.imbalance > self.config.target_imbalance * (1.0 + self.config.band);
        let kind = match self.phase {
            Phase::RatioDiscovery => self.discover_ratio(signals.alpha_c),
            Phase::ImbalanceSearch if over => self.double_both(signals.alpha_c),
            Phase::ImbalanceSearch => {
                if self.alpha_pending || self.alpha_target == 0.0 {
                    self.alpha_target = signals.alpha_c;
                    self.alpha_pending = false;
                }
                self.phase = Phase::Steady;
                ActionKind::Hold
            }
            Phase::Steady if over => self.double_both(signals.alpha_c),
            Phase::Steady => {
                let floor = (1.0 - self.config.epsilon) * self.alpha_target;
                if signals.alpha_c < floor && signals.alpha_kc < floor {
                    self.halve_both()
                } else if signals.alpha_c < floor {
                    ActionKind::Decay
                } else {
                    ActionKind::Hold
                }
            }
        };
        if kind != ActionKind::Hold {
            self.warmup_remaining = self.config.warmup_epochs;
        }
        self.epoch_size = self.epoch_size.max(self.tracker_lines as u64);
        self.action(kind)
    }

    /// A tracker doubling pays off when hits per line grow by the relative
    /// gain threshold and the extra hits exceed three standard deviations of
    /// Poisson noise on the earlier hit count.
    fn significant_gain(&self, alpha_c: f64, last: f64) -> bool {
        let lines = self.cache_lines as f64;
        let (hits, last_hits) = (alpha_c * lines, last * lines);
        alpha_c >= last * (1.0 + self.config.gain_threshold) && hits - last_hits > 3.0 * last_hits.max(1.0).sqrt()
    }

    fn discover_ratio(&mut self, alpha_c: f64) -> ActionKind {
        let ratio_room = self.tracker_lines * 2 <= self.cache_lines * self.config.max_ratio;
        let gained = self.last_alpha_c.map(|last| self.significant_gain(alpha_c, last));
        match gained {
            None | Some(true) if ratio_room => {
                self.last_alpha_c = Some(alpha_c);
                self.tracker_lines *= 2;
                ActionKind::DoubleTracker
            }
            Some(false) => {
                self.last_alpha_c = None;
                self.phase = Phase::ImbalanceSearch;
                let halved = (self.tracker_lines / 2).max(2 * self.cache_lines).max(self.config.min_tracker);
                if halved == self.tracker_lines {
                    ActionKind::Hold
                } else {
                    self.tracker_lines = halved;
                    ActionKind::ShrinkTrackerBack
                }
            }
            _ => {
                // Ratio cap reached while still gaining.
                self.last_alpha_c = None;
                self.phase = Phase::ImbalanceSearch;
                ActionKind::Hold
            }
        }
    }

    fn double_both(&mut self, alpha_c: f64) -> ActionKind {
        self.phase = Phase::ImbalanceSearch;
        if self.cache_lines * 2 > self.config.max_cache {
            return ActionKind::Hold;
        }
        self.alpha_target = alpha_c;
        self.alpha_pending = true;
        self.rediscover_on_shrink = true;
        self.cache_lines *= 2;
        self.tracker_lines *= 2;
        ActionKind::DoubleBoth
    }

    fn halve_both(&mut self) -> ActionKind {
        let cache = (self.cache_lines / 2).max(self.config.min_cache);
        let tracker = if self.rediscover_on_shrink {
            2 * cache
        } else {
            self.tracker_lines / 2
        }
        .max(2 * cache)
        .max(self.config.min_tracker);
        if (cache, tracker) == (self.cache_lines, self.tracker_lines) {
            return ActionKind::Hold;
        }
        if self.rediscover_on_shrink {
            self.rediscover_on_shrink = false;
            self.phase = Phase::RatioDiscovery;
            self.last_alpha_c = None;
        }
        self.cache_lines = cache;
        self.tracker_lines = tracker;
        ActionKind::HalveBoth
    }

    fn action(&self, kind: ActionKind) -> ResizeAction {
        ResizeAction {
            kind,
            cache_lines: self.cache_lines,
            tracker_lines: self.tracker_lines,
            epoch_size: self.epoch_size,
        }
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        let (c, k, e) = (self.cache_lines, self.tracker_lines, self.epoch_size);
        if k < 2 * c {
            return Err(format!("tracker {k} < 2 * cache {c}"));
        }
        if e < k as u64 {
            return Err(format!("epoch {e} < tracker {k}"));
        }
        if c < self.config.min_cache || k < self.config.min_tracker {
            return Err(format!("sizes ({c}, {k}) below floors"));
        }
        Ok(())
    }
}

/// True exactly when `access_count` is a positive multiple of `epoch_size`.
pub fn epoch_boundary(access_count: u64, epoch_size: u64) -> bool {
    epoch_size > 0 && access_count > 0 && access_count.is_multiple_of(epoch_size)
}

impl FromStr for ActionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            ActionKind::DoubleBoth,
            ActionKind::HalveBoth,
            ActionKind::DoubleTracker,
            ActionKind::ShrinkTrackerBack,
            ActionKind::Decay,
            ActionKind::Hold,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| format!("unknown action `{s}`"))
    }
}
