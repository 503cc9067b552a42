//! Round-robin simulation of front-ends in front of a sharded back-end.
//!
//! Global access `t` is served by front-end `t % front_ends`. Every miss and
//! every update is forwarded to the shard owning the key.

use std::collections::VecDeque;

use crate::cluster::{imbalance, ShardLoad, ShardMap};
use crate::cot::CotCache;
use crate::hotness::{AccessType, Key};
use crate::policy::ReplacementPolicy;
use crate::resizer::{derive_signals, ActionKind, EpochStats, ResizerConfig, ResizerState};
use crate::tracker::TrackerError;
use crate::workload::{AccessEvent, Sampler};

use super::config::SignalScope;

#[derive(Debug, Clone)]
pub struct SimParams<'a> {
    pub sampler: &'a Sampler,
    pub shard_map: &'a ShardMap,
    pub front_ends: usize,
    pub accesses: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOutcome {
    pub accesses: u64,
    pub reads: u64,
    pub hits: u64,
    pub load: ShardLoad,
    pub front_end_hits: Vec<u64>,
}

impl SimOutcome {
    pub fn hit_rate(&self) -> f64 {
        if self.accesses == 0 {
            0.0
        } else {
            self.hits as f64 / self.accesses as f64
        }
    }
}

/// Runs one policy instance per front-end. `observe` sees every access as
/// `(front_end, event, hit)`.
pub fn simulate<P, F>(params: &SimParams<'_>, mut make_policy: P, mut observe: F) -> SimOutcome
where
    P: FnMut(usize) -> Box<dyn ReplacementPolicy>,
    F: FnMut(usize, AccessEvent, bool),
{
    let n = params.front_ends;
    let mut policies: Vec<_> = (0..n).map(&mut make_policy).collect();
    let mut generators: Vec<_> = (0..n).map(|fe| params.sampler.generator(params.seed, fe as u64)).collect();
    let mut load = ShardLoad::new(params.shard_map.shards());
    let mut front_end_hits = vec![0u64; n];
    let (mut reads, mut hits) = (0u64, 0u64);
    for t in 0..params.accesses {
        let fe = (t % n as u64) as usize;
        let event = generators[fe].next_event();
        let hit = policies[fe].access(event.key, event.access);
        if event.access == AccessType::Read {
            reads += 1;
        }
        if hit {
            hits += 1;
            front_end_hits[fe] += 1;
        } else {
            load.record(params.shard_map.shard_for(event.key));
        }
        observe(fe, event, hit);
    }
    SimOutcome {
        accesses: params.accesses,
        reads,
        hits,
        load,
        front_end_hits,
    }
}

/// One row of a resize trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub epoch: u64,
    pub cache_lines: usize,
    pub tracker_lines: usize,
    pub epoch_size: u64,
    pub imbalance: f64,
    pub alpha_c: f64,
    pub alpha_kc: f64,
    pub alpha_t: f64,
    pub action: ActionKind,
    /// Accesses this front-end had served when the epoch began.
    pub first_access: u64,
}

#[derive(Debug, Clone)]
pub struct TraceParams<'a> {
    pub sim: SimParams<'a>,
    /// Replacement sampler and the global access count at which it takes over.
    pub swap: Option<(&'a Sampler, u64)>,
    pub resizer: ResizerConfig,
    pub signal: SignalScope,
    /// Epochs of shard lookups behind each imbalance reading. The window
    /// restarts after every resize.
    pub signal_window: usize,
    pub traced: usize,
}

#[derive(Debug, Clone)]
pub struct TraceOutcome {
    pub rows: Vec<TraceRow>,
    pub load: ShardLoad,
    pub hits: u64,
}

struct FrontEnd {
    cache: CotCache<()>,
    resizer: ResizerState,
    epoch: u64,
    served: u64,
    epoch_start: u64,
    hits: u64,
    tracker_only: u64,
    local: Vec<u64>,
    snapshot: Vec<u64>,
    window: VecDeque<Vec<u64>>,
}

/// Runs CoT with an elastic resizer on every front-end and records the
/// epochs of front-end `traced`.
pub fn trace(params: &TraceParams<'_>) -> Result<TraceOutcome, TrackerError> {
    let sim = &params.sim;
    let n = sim.front_ends;
    let shards = sim.shard_map.shards() as usize;
    let mut front_ends = Vec::with_capacity(n);
    for _ in 0..n {
        let resizer = ResizerState::new(params.resizer.clone()).expect("validated resizer config");
        front_ends.push(FrontEnd {
            cache: CotCache::new(resizer.cache_lines(), resizer.tracker_lines())?,
            resizer,
            epoch: 0,
            served: 0,
            epoch_start: 0,
            hits: 0,
            tracker_only: 0,
            local: vec![0; shards],
            snapshot: vec![0; shards],
            window: VecDeque::with_capacity(params.signal_window),
        });
    }
    let mut generators: Vec<_> = (0..n).map(|fe| sim.sampler.generator(sim.seed, fe as u64)).collect();
    let mut load = ShardLoad::new(sim.shard_map.shards());
    let mut rows = Vec::new();
    let mut total_hits = 0u64;
    for t in 0..sim.accesses {
        if let Some((sampler, at)) = params.swap {
            if t == at {
                for g in &mut generators {
                    g.switch(sampler.clone());
                }
            }
        }
        let i = (t % n as u64) as usize;
        let event = generators[i].next_event();
        let fe = &mut front_ends[i];
        let out = fe
            .cache
            .serve(event.key, event.access, |_: Key| Ok::<(), std::convert::Infallible>(()))
            .unwrap_or_else(|e| match e {});
        if out.cache_hit {
            fe.hits += 1;
            total_hits += 1;
        } else if out.tracker_only_hit() {
            fe.tracker_only += 1;
        }
        if out.forwarded {
            let shard = sim.shard_map.shard_for(event.key);
            load.record(shard);
            fe.local[shard as usize] += 1;
        }
        fe.served += 1;
        if fe.served - fe.epoch_start < fe.resizer.epoch_size() {
            continue;
        }
        let epoch_lookups = match params.signal {
            SignalScope::FrontEnd => fe.local.clone(),
            SignalScope::Cluster => load.cumulative().iter().zip(&fe.snapshot).map(|(a, b)| a - b).collect(),
        };
        if fe.window.len() == params.signal_window.max(1) {
            fe.window.pop_front();
        }
        fe.window.push_back(epoch_lookups);
        let mut lookups = vec![0u64; shards];
        for epoch in &fe.window {
            lookups.iter_mut().zip(epoch).for_each(|(a, b)| *a += b);
        }
        let stats = EpochStats {
            epoch: fe.epoch,
            accesses: fe.served - fe.epoch_start,
            cache_hits: fe.hits,
            tracker_only_hits: fe.tracker_only,
            shard_lookups: lookups,
            cache_lines: fe.cache.capacity(),
            tracker_lines: fe.cache.tracker_capacity(),
        };
        let signals = derive_signals(&stats);
        let action = fe.resizer.end_epoch(&signals);
        match action.kind {
            ActionKind::Hold => {}
            ActionKind::Decay => fe.cache.decay_half_life(),
            _ => fe.cache.resize(action.cache_lines, action.tracker_lines)?,
        }
        if action.kind != ActionKind::Hold {
            fe.window.clear();
        }
        if i == params.traced {
            rows.push(TraceRow {
                epoch: fe.epoch,
                cache_lines: stats.cache_lines,
                tracker_lines: stats.tracker_lines,
                epoch_size: stats.accesses,
                imbalance: signals.imbalance,
                alpha_c: signals.alpha_c,
                alpha_kc: signals.alpha_kc,
                alpha_t: fe.resizer.alpha_target(),
                action: action.kind,
                first_access: fe.epoch_start,
            });
        }
        fe.epoch += 1;
        fe.epoch_start = fe.served;
        fe.hits = 0;
        fe.tracker_only = 0;
        fe.local.iter_mut().for_each(|c| *c = 0);
        fe.snapshot.copy_from_slice(load.cumulative());
    }
    Ok(TraceOutcome {
        rows,
        load,
        hits: total_hits,
    })
}

/// Cluster-level imbalance of a finished run.
pub fn run_imbalance(outcome: &SimOutcome) -> f64 {
    imbalance(outcome.load.cumulative())
}
