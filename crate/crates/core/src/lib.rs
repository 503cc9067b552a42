//! Front-end caching for skewed key-value workloads: the CoT cache, its
//! elastic resizer, baseline replacement policies, a workload generator, a
//! consistent-hashing cluster model, and the experiment harness that ties
//! them together.

pub mod cluster;
pub mod cot;
pub mod harness;
pub mod heap;
pub mod hotness;
pub mod parallel;
pub mod policy;
pub mod resizer;
pub mod tracker;
pub mod workload;

pub use cluster::{relative_server_load, HashRing, ShardLoad, ShardMap};
pub use cot::{CotCache, ServeOutcome};
pub use harness::{parse_config, run_experiment, ExperimentConfig, Mode, Scale};
pub use hotness::{AccessType, Hotness, HotnessEntry, HotnessWeights, Key};
pub use policy::{build_policy, tpc_hit_rate, PolicyConfig, PolicyKind, ReplacementPolicy};
pub use resizer::{derive_signals, ActionKind, DerivedSignals, EpochStats, ResizeAction, ResizerConfig, ResizerState};
pub use tracker::{Tracker, TrackerError};
pub use workload::{zipf_cdf, AccessEvent, Sampler, WorkloadKind, WorkloadSpec};
