//! Experiment runner: builds the cluster and workloads from a config, runs
//! the requested mode, and writes one CSV per run.
//!
//! CSV schemas (column order is fixed, rates carry six decimals):
//!
//! * hit rate: `policy,skew,cache_lines,tracker_lines,accesses,hits,hit_rate`
//! * imbalance: `policy,skew,cache_lines,I_c,relative_load`
//! * epoch trace: `epoch,C,K,E,I_c,alpha_c,alpha_kc,alpha_t,action`
//!
//! `hit_rate_sweep` and `tracker_sweep` write the hit-rate schema,
//! `imbalance_search` the imbalance schema (the no-cache baseline appears as
//! policy `none` with zero cache lines), `resize_trace` the epoch trace of
//! one front-end.

pub mod config;
pub mod presets;
pub mod sim;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use crate::cluster::{imbalance, relative_server_load, HashRing, ShardMap};
use crate::parallel::Execution;
use crate::policy::{build_policy, PolicyConfig, PolicyKind, ReplacementPolicy};
use crate::workload::{Sampler, WorkloadKind, WorkloadSpec};

pub use config::{parse_config, ConfigError, ExperimentConfig, Mode, Scale, SignalScope};
pub use sim::{simulate, trace, SimOutcome, SimParams, TraceOutcome, TraceParams, TraceRow};

pub const HIT_RATE_HEADER: &str = "policy,skew,cache_lines,tracker_lines,accesses,hits,hit_rate";
pub const IMBALANCE_HEADER: &str = "policy,skew,cache_lines,I_c,relative_load";
pub const TRACE_HEADER: &str = "epoch,C,K,E,I_c,alpha_c,alpha_kc,alpha_t,action";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HitRateRow {
    pub policy: PolicyKind,
    pub workload: WorkloadKind,
    pub cache_lines: usize,
    pub tracker_lines: usize,
    pub accesses: u64,
    pub hits: u64,
}

impl HitRateRow {
    pub fn hit_rate(&self) -> f64 {
        self.hits as f64 / self.accesses as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImbalanceRow {
    /// `None` for the no-cache baseline.
    pub policy: Option<PolicyKind>,
    pub workload: WorkloadKind,
    pub cache_lines: usize,
    pub imbalance: f64,
    pub relative_load: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rows {
    HitRate(Vec<HitRateRow>),
    Imbalance(Vec<ImbalanceRow>),
    Trace(Vec<TraceRow>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub rows: Rows,
}

impl ExperimentOutput {
    pub fn file_name(&self) -> String {
        format!("{}.csv", self.config.output)
    }

    pub fn csv(&self) -> String {
        let mut out = String::new();
        match &self.rows {
            Rows::HitRate(rows) => {
                out.push_str(HIT_RATE_HEADER);
                out.push('\n');
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{:.6}",
                        r.policy,
                        r.workload.label(),
                        r.cache_lines,
                        r.tracker_lines,
                        r.accesses,
                        r.hits,
                        r.hit_rate()
                    );
                }
            }
            Rows::Imbalance(rows) => {
                out.push_str(IMBALANCE_HEADER);
                out.push('\n');
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{:.6},{:.6}",
                        r.policy.map_or("none", |p| p.name()),
                        r.workload.label(),
                        r.cache_lines,
                        r.imbalance,
                        r.relative_load
                    );
                }
            }
            Rows::Trace(rows) => {
                out.push_str(TRACE_HEADER);
                out.push('\n');
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{}",
                        r.epoch,
                        r.cache_lines,
                        r.tracker_lines,
                        r.epoch_size,
                        r.imbalance,
                        r.alpha_c,
                        r.alpha_kc,
                        r.alpha_t,
                        r.action
                    );
                }
            }
        }
        out
    }

    /// Human-readable summary for standard output.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        match &self.rows {
            Rows::HitRate(rows) => {
                let _ = writeln!(out, "{:<8} {:<10} {:>8} {:>8} {:>10}", "policy", "workload", "C", "K", "hit rate");
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{:<8} {:<10} {:>8} {:>8} {:>9.2}%",
                        r.policy.name(),
                        r.workload.label(),
                        r.cache_lines,
                        r.tracker_lines,
                        100.0 * r.hit_rate()
                    );
                }
            }
            Rows::Imbalance(rows) => {
                let target = self.config.resizer.target_imbalance;
                let _ = writeln!(
                    out,
                    "{:<10} {:>10}  minimum cache lines for I_c <= {target}",
                    "workload", "no cache"
                );
                for kind in &self.config.workloads {
                    let base = rows
                        .iter()
                        .find(|r| r.policy.is_none() && r.workload == *kind)
                        .map_or(f64::NAN, |r| r.imbalance);
                    let mut line = format!("{:<10} {:>10.3} ", kind.label(), base);
                    for &p in &self.config.policies {
                        let min = minimum_cache_lines(rows, p, kind, target);
                        let cell = min.map_or_else(|| "-".to_string(), |c| c.to_string());
                        let _ = write!(line, " {}={}", p.name(), cell);
                    }
                    out.push_str(line.trim_end());
                    out.push('\n');
                }
            }
            Rows::Trace(rows) => {
                if let Some(last) = rows.last() {
                    let _ = writeln!(
                        out,
                        "{} epochs; final C={} K={} E={} I_c={:.3} alpha_c={:.3} alpha_t={:.3} action={}",
                        rows.len(),
                        last.cache_lines,
                        last.tracker_lines,
                        last.epoch_size,
                        last.imbalance,
                        last.alpha_c,
                        last.alpha_t,
                        last.action
                    );
                } else {
                    out.push_str("no complete epoch\n");
                }
            }
        }
        out
    }

    /// Writes the CSV into `dir`, creating it if needed. A partially written
    /// file is removed.
    pub fn write_to(&self, dir: &Path) -> Result<PathBuf, HarnessError> {
        let path = dir.join(self.file_name());
        let io_err = |source| HarnessError::Io {
            path: path.clone(),
            source,
        };
        fs::create_dir_all(dir).map_err(io_err)?;
        let result = fs::File::create(&path).and_then(|mut f| {
            f.write_all(self.csv().as_bytes())?;
            f.sync_all()
        });
        if let Err(e) = result {
            let _ = fs::remove_file(&path);
            return Err(io_err(e));
        }
        Ok(path)
    }
}

/// Smallest evaluated cache size at which `policy` met the target.
pub fn minimum_cache_lines(rows: &[ImbalanceRow], policy: PolicyKind, kind: &WorkloadKind, target: f64) -> Option<usize> {
    rows.iter()
        .filter(|r| r.policy == Some(policy) && r.workload == *kind && r.imbalance <= target)
        .map(|r| r.cache_lines)
        .min()
}

/// Cluster shared by every front-end of a run.
pub fn shard_map(config: &ExperimentConfig) -> Result<ShardMap, HarnessError> {
    let ring = HashRing::new(config.shards, config.vnodes).map_err(|e| HarnessError::Runtime(e.to_string()))?;
    Ok(ShardMap::new(ring, config.key_space))
}

fn sampler(config: &ExperimentConfig, kind: WorkloadKind, read_ratio: f64) -> Result<Sampler, HarnessError> {
    let spec = WorkloadSpec {
        kind,
        key_space: config.key_space,
        read_ratio,
        seed: config.seed,
        total_accesses: config.accesses,
    };
    Sampler::new(&spec).map_err(|e| HarnessError::Runtime(e.to_string()))
}

fn policy_for(kind: PolicyKind, cache_lines: usize, tracker_lines: usize) -> Box<dyn ReplacementPolicy> {
    build_policy(kind, &PolicyConfig::new(cache_lines).with_history(tracker_lines))
        .expect("tracker sizes exceed cache sizes")
}

/// Tracker (or history) size paired with a cache size.
fn tracker_size(policy: PolicyKind, cache_lines: usize, ratio: usize) -> usize {
    if policy.uses_tracker() {
        (cache_lines * ratio).max(cache_lines + 1)
    } else {
        0
    }
}

fn sim_params<'a>(config: &ExperimentConfig, map: &'a ShardMap, sampler: &'a Sampler) -> SimParams<'a> {
    SimParams {
        sampler,
        shard_map: map,
        front_ends: config.front_ends,
        accesses: config.accesses,
        seed: config.seed,
    }
}

/// Runs an experiment with the default execution strategy.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    run_experiment_with(config, Execution::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentOutput, HarnessError> {
    let map = shard_map(config)?;
    let samplers = config
        .workloads
        .iter()
        .map(|&k| sampler(config, k, config.read_ratio))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = match config.mode {
        Mode::HitRateSweep | Mode::TrackerSweep => {
            let mut points = Vec::new();
            for (w, kind) in config.workloads.iter().enumerate() {
                for &policy in &config.policies {
                    if config.mode == Mode::TrackerSweep {
                        for &k in &config.tracker_lines {
                            points.push((w, policy, config.cache_lines[0], k));
                        }
                    } else {
                        let ratio = config.tracker_ratio_for(kind);
                        for &c in &config.cache_lines {
                            points.push((w, policy, c, tracker_size(policy, c, ratio)));
                        }
                    }
                }
            }
            let rows = exec.map(&points, |&(w, policy, c, k)| {
                let out = simulate(&sim_params(config, &map, &samplers[w]), |_| policy_for(policy, c, k), |_, _, _| ());
                HitRateRow {
                    policy,
                    workload: config.workloads[w],
                    cache_lines: c,
                    tracker_lines: k,
                    accesses: out.accesses,
                    hits: out.hits,
                }
            });
            Rows::HitRate(rows)
        }
        Mode::ImbalanceSearch => {
            // Item `None` is the no-cache baseline of its workload.
            let mut items: Vec<(usize, Option<PolicyKind>)> = Vec::new();
            for w in 0..config.workloads.len() {
                items.push((w, None));
                items.extend(config.policies.iter().map(|&p| (w, Some(p))));
            }
            let baselines = exec.map(&(0..config.workloads.len()).collect::<Vec<_>>(), |&w| {
                simulate(&sim_params(config, &map, &samplers[w]), |_| policy_for(PolicyKind::Lru, 0, 0), |_, _, _| ())
            });
            let target = config.resizer.target_imbalance;
            let groups = exec.map(&items, |&(w, policy)| {
                let kind = config.workloads[w];
                let base = &baselines[w];
                let Some(policy) = policy else {
                    return vec![ImbalanceRow {
                        policy: None,
                        workload: kind,
                        cache_lines: 0,
                        imbalance: imbalance(base.load.cumulative()),
                        relative_load: 1.0,
                    }];
                };
                let ratio = config.tracker_ratio_for(&kind);
                let mut rows = Vec::new();
                for &c in &config.cache_lines {
                    let k = tracker_size(policy, c, ratio);
                    let out = simulate(&sim_params(config, &map, &samplers[w]), |_| policy_for(policy, c, k), |_, _, _| ());
                    let i_c = imbalance(out.load.cumulative());
                    rows.push(ImbalanceRow {
                        policy: Some(policy),
                        workload: kind,
                        cache_lines: c,
                        imbalance: i_c,
                        relative_load: relative_server_load(&out.load, &base.load).unwrap_or(0.0),
                    });
                    if i_c <= target && !config.full_curve {
                        break;
                    }
                }
                rows
            });
            Rows::Imbalance(groups.into_iter().flatten().collect())
        }
        Mode::ResizeTrace => {
            let swap_sampler = match &config.swap {
                Some(s) => Some(sampler(config, s.kind, s.read_ratio)?),
                None => None,
            };
            let traced = trace(&TraceParams {
                sim: sim_params(config, &map, &samplers[0]),
                swap: swap_sampler.as_ref().zip(config.swap.as_ref().map(|s| s.at)),
                resizer: config.resizer.clone(),
                signal: config.signal,
                signal_window: config.signal_window,
                traced: config.trace_front_end,
            })
            .map_err(|e| HarnessError::Runtime(e.to_string()))?;
            Rows::Trace(traced.rows)
        }
    };
    Ok(ExperimentOutput {
        config: config.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk(text: &str) -> ExperimentConfig {
        parse_config(text, Scale::Desk).unwrap()
    }

    #[test]
    fn uniform_with_everything_cached_misses_only_first_touches() {
        let config = desk(
            "mode = hit_rate_sweep\nfront_ends = 1\naccesses = 20000\n[workload]\nkind = uniform\nkey_space = 50\nread_ratio = 1\n[policy]\npolicies = LRU, LFU, ARC, LRU2, CoT, TPC\ncache_lines = 64\n",
        );
        let out = run_experiment(&config).unwrap();
        let Rows::HitRate(rows) = &out.rows else { panic!() };
        for r in rows {
            // The perfect cache holds every key from the start.
            let expected = if r.policy == PolicyKind::Perfect { 20_000 } else { 20_000 - 50 };
            assert_eq!(r.hits, expected, "{}", r.policy);
        }
    }

    #[test]
    fn csv_has_header_and_fixed_decimals() {
        let config = desk(
            "mode = hit_rate_sweep\nfront_ends = 2\naccesses = 1000\n[workload]\nkind = zipfian\nskew = 1.2\nkey_space = 1000\n[policy]\npolicies = LRU\ncache_lines = 4\n",
        );
        let csv = run_experiment(&config).unwrap().csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(HIT_RATE_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&row[..5], &["LRU", "1.2", "4", "0", "1000"]);
        assert_eq!(row[6].split('.').nth(1).unwrap().len(), 6);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let config = desk(
            "mode = hit_rate_sweep\nfront_ends = 3\naccesses = 5000\n[workload]\nkind = zipfian\nskew = 0.9, 1.2\nkey_space = 2000\n[policy]\ncache_lines = 8, 32\n",
        );
        let a = run_experiment_with(&config, Execution::Parallel).unwrap();
        let b = run_experiment_with(&config, Execution::Sequential).unwrap();
        assert_eq!(a.csv(), b.csv());
    }

    #[test]
    fn imbalance_search_stops_at_target() {
        let config = desk(
            "mode = imbalance_search\nfront_ends = 2\naccesses = 40000\n[workload]\nkind = zipfian\nskew = 1.2\nkey_space = 5000\n[policy]\npolicies = CoT\ncache_lines = 1, 2, 4, 8, 16, 32, 64, 128, 256, 512\n[resizer]\ntarget_imbalance = 1.5\n",
        );
        let out = run_experiment(&config).unwrap();
        let Rows::Imbalance(rows) = &out.rows else { panic!() };
        assert!(rows[0].policy.is_none());
        assert_eq!(rows[0].relative_load, 1.0);
        let cot: Vec<_> = rows.iter().filter(|r| r.policy.is_some()).collect();
        let last = cot.last().unwrap();
        assert!(cot[..cot.len() - 1].iter().all(|r| r.imbalance > 1.5));
        if last.imbalance <= 1.5 {
            assert_eq!(minimum_cache_lines(rows, PolicyKind::Cot, &rows[0].workload, 1.5), Some(last.cache_lines));
        }
        assert!(out.summary().contains("CoT="));
    }

    #[test]
    fn write_creates_directory_and_file() {
        let dir = tempfile::tempdir().unwrap();
        let config = desk(
            "mode = hit_rate_sweep\noutput = small\nfront_ends = 1\naccesses = 100\n[workload]\nkind = uniform\nkey_space = 10\n[policy]\npolicies = LRU\ncache_lines = 2\n",
        );
        let out = run_experiment(&config).unwrap();
        let path = out.write_to(&dir.path().join("nested")).unwrap();
        assert!(path.ends_with("small.csv"));
        assert_eq!(fs::read_to_string(path).unwrap(), out.csv());
    }
}
