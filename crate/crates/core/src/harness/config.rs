//! Experiment configuration: a flat `key = value` format with `[section]`
//! headers. `#` starts a comment. Lists are comma separated.
//!
//! ```text
//! mode = hit_rate_sweep
//! seed = 7
//!
//! [workload]
//! kind = zipfian
//! skew = 0.9, 0.99, 1.2
//!
//! [policy]
//! policies = LRU, LFU, ARC, LRU2, CoT, TPC
//! cache_lines = 2, 4, 8, 16
//! ```
//!
//! Keys outside any section belong to the experiment itself. Unknown keys,
//! unknown sections, and repeated keys are errors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::policy::PolicyKind;
use crate::resizer::ResizerConfig;
use crate::workload::{WorkloadKind, DEFAULT_READ_RATIO};

/// Virtual nodes per shard used by experiments unless configured.
pub const EXPERIMENT_VNODES: u32 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    HitRateSweep,
    ImbalanceSearch,
    ResizeTrace,
    TrackerSweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::HitRateSweep => "hit_rate_sweep",
            Mode::ImbalanceSearch => "imbalance_search",
            Mode::ResizeTrace => "resize_trace",
            Mode::TrackerSweep => "tracker_sweep",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hit_rate_sweep" => Ok(Mode::HitRateSweep),
            "imbalance_search" => Ok(Mode::ImbalanceSearch),
            "resize_trace" => Ok(Mode::ResizeTrace),
            "tracker_sweep" => Ok(Mode::TrackerSweep),
            other => Err(format!(
                "unknown mode `{other}` (expected hit_rate_sweep, imbalance_search, resize_trace or tracker_sweep)"
            )),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Default key space and access count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    /// 100,000 keys, 2,000,000 accesses.
    #[default]
    Desk,
    /// 1,000,000 keys, 10,000,000 accesses.
    Full,
}

impl Scale {
    pub fn key_space(self) -> u64 {
        match self {
            Scale::Desk => 100_000,
            Scale::Full => 1_000_000,
        }
    }

    pub fn accesses(self) -> u64 {
        match self {
            Scale::Desk => 2_000_000,
            Scale::Full => 10_000_000,
        }
    }
}

/// Where the resizer's imbalance signal comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignalScope {
    /// Lookups from every front-end during the front-end's epoch.
    #[default]
    Cluster,
    /// Only the front-end's own lookups.
    FrontEnd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapConfig {
    pub kind: WorkloadKind,
    pub read_ratio: f64,
    /// Total accesses (over all front-ends) served before the swap.
    pub at: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub seed: u64,
    pub front_ends: usize,
    pub accesses: u64,
    pub key_space: u64,
    pub read_ratio: f64,
    /// One entry per swept workload (one per skew for Zipfian).
    pub workloads: Vec<WorkloadKind>,
    pub swap: Option<SwapConfig>,
    pub policies: Vec<PolicyKind>,
    pub cache_lines: Vec<usize>,
    pub tracker_lines: Vec<usize>,
    /// Tracker (or LRU-2 history) lines per cache line; `None` picks by skew.
    pub tracker_ratio: Option<usize>,
    pub shards: u32,
    pub vnodes: u32,
    pub resizer: ResizerConfig,
    pub signal: SignalScope,
    /// Epochs of lookups behind each imbalance reading of the resizer.
    pub signal_window: usize,
    pub trace_front_end: usize,
    /// Imbalance search evaluates every cache size instead of stopping at the first that meets the target.
    pub full_curve: bool,
    pub output: String,
}

/// Tracker lines per cache line by skew: 16 below 0.95, 8 below 1.1, 4 above.
pub fn default_tracker_ratio(kind: &WorkloadKind) -> usize {
    match kind {
        WorkloadKind::Zipfian { skew } if *skew < 0.95 => 16,
        WorkloadKind::Zipfian { skew } if *skew < 1.1 => 8,
        _ => 4,
    }
}

impl ExperimentConfig {
    pub fn tracker_ratio_for(&self, kind: &WorkloadKind) -> usize {
        self.tracker_ratio.unwrap_or_else(|| default_tracker_ratio(kind))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line: Some(line),
            message: message.into(),
        }
    }

    fn general(message: impl Into<String>) -> Self {
        ConfigError {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

const SECTIONS: &[(&str, &[&str])] = &[
    ("", &["mode", "seed", "front_ends", "accesses", "output", "full_curve"]),
    (
        "workload",
        &["kind", "skew", "key_space", "read_ratio", "hot_keys", "hot_fraction", "swap_at"],
    ),
    ("swap", &["kind", "skew", "read_ratio", "hot_keys", "hot_fraction"]),
    ("policy", &["policies", "cache_lines", "tracker_lines", "tracker_ratio"]),
    ("cluster", &["shards", "vnodes"]),
    (
        "resizer",
        &[
            "target_imbalance",
            "epsilon",
            "band",
            "warmup",
            "gain_threshold",
            "epoch",
            "cache",
            "tracker",
            "min_cache",
            "min_tracker",
            "max_cache",
            "max_ratio",
            "signal",
            "signal_window",
            "trace_front_end",
        ],
    ),
];

/// Every recognized key as `section.key` (top-level keys bare), with its
/// default. Used for `--help`.
pub const KEY_REFERENCE: &str = "\
mode                      hit_rate_sweep | imbalance_search | resize_trace | tracker_sweep (required)
seed                      42
front_ends                20
accesses                  2000000 (10000000 with --paper-scale), over all front-ends
output                    file prefix, defaults to the mode name
full_curve                false; imbalance_search evaluates every cache size when true
[workload] kind           zipfian | uniform | hotspot (required)
[workload] skew           0.99; a list sweeps several skews
[workload] key_space      100000 (1000000 with --paper-scale)
[workload] read_ratio     0.998
[workload] hot_keys       hotspot only
[workload] hot_fraction   hotspot only
[workload] swap_at        access count at which [swap] replaces the workload
[swap] kind, skew, read_ratio, hot_keys, hot_fraction
[policy] policies         LRU, LFU, ARC, LRU2, CoT, TPC
[policy] cache_lines      2..1024 by doubling (imbalance_search: 1..65536; tracker_sweep: 64)
[policy] tracker_lines    tracker_sweep only: 128..4096 by doubling
[policy] tracker_ratio    16 for skew < 0.95, 8 for skew < 1.1, 4 otherwise
[cluster] shards          8
[cluster] vnodes          2000
[resizer] target_imbalance 1.1
[resizer] epsilon         0.05
[resizer] band            0.02
[resizer] warmup          5
[resizer] gain_threshold  0.05
[resizer] epoch           5000
[resizer] cache, tracker  2, 4
[resizer] min_cache, min_tracker, max_cache, max_ratio  1, 2, 16777216, 64
[resizer] signal          cluster | front_end
[resizer] signal_window   5 epochs, restarted after every resize
[resizer] trace_front_end 0";

struct Entry {
    value: String,
    line: usize,
}

struct Document {
    entries: BTreeMap<(String, String), Entry>,
    sections: BTreeMap<String, usize>,
}

impl Document {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut sections = BTreeMap::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at(line, "unterminated section header"))?
                    .trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) || name.is_empty() {
                    return Err(ConfigError::at(line, format!("unknown section `[{name}]`")));
                }
                if sections.insert(name.to_string(), line).is_some() {
                    return Err(ConfigError::at(line, format!("duplicate section `[{name}]`")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let known = SECTIONS
                .iter()
                .find(|(s, _)| *s == section)
                .is_some_and(|(_, keys)| keys.contains(&key));
            if !known {
                return Err(ConfigError::at(line, format!("unknown key `{}`", qualified(&section, key))));
            }
            if value.is_empty() {
                return Err(ConfigError::at(line, format!("`{}` has no value", qualified(&section, key))));
            }
            let slot = (section.clone(), key.to_string());
            if let Some(prev) = entries.get(&slot) {
                let prev: &Entry = prev;
                return Err(ConfigError::at(
                    line,
                    format!("duplicate key `{}` (first set on line {})", qualified(&section, key), prev.line),
                ));
            }
            entries.insert(
                slot,
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(Document { entries, sections })
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn scalar<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|_| {
                ConfigError::at(e.line, format!("invalid value `{}` for `{}`", e.value, qualified(section, key)))
            }),
        }
    }

    fn list<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
        let Some(e) = self.get(section, key) else {
            return Ok(None);
        };
        let items: Result<Vec<T>, _> = e.value.split(',').map(|s| s.trim().parse()).collect();
        match items {
            Ok(v) if !v.is_empty() => Ok(Some(v)),
            _ => Err(ConfigError::at(
                e.line,
                format!("invalid list `{}` for `{}`", e.value, qualified(section, key)),
            )),
        }
    }

    fn line(&self, section: &str, key: &str) -> Option<usize> {
        self.get(section, key).map(|e| e.line)
    }
}

fn qualified(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

fn doubling(from: usize, to: usize) -> Vec<usize> {
    std::iter::successors(Some(from), |&c| Some(c * 2)).take_while(|&c| c <= to).collect()
}

/// Builds a workload kind from the keys of `section`; `skew` may be a list.
fn workload_kinds(doc: &Document, section: &str, allow_list: bool) -> Result<Vec<WorkloadKind>, ConfigError> {
    let kind_entry = doc
        .get(section, "kind")
        .ok_or_else(|| ConfigError::general(format!("missing `{}`", qualified(section, "kind"))))?;
    let not_for = |key: &str, kind: &str| -> Result<(), ConfigError> {
        match doc.line(section, key) {
            Some(line) => Err(ConfigError::at(
                line,
                format!("`{}` does not apply to {kind} workloads", qualified(section, key)),
            )),
            None => Ok(()),
        }
    };
    match kind_entry.value.as_str() {
        "zipfian" => {
            not_for("hot_keys", "zipfian")?;
            not_for("hot_fraction", "zipfian")?;
            let skews: Vec<f64> = doc.list(section, "skew")?.unwrap_or_else(|| vec![0.99]);
            if skews.len() > 1 && !allow_list {
                return Err(ConfigError::at(
                    doc.line(section, "skew").unwrap_or(kind_entry.line),
                    format!("`{}` takes a single value", qualified(section, "skew")),
                ));
            }
            Ok(skews.into_iter().map(|skew| WorkloadKind::Zipfian { skew }).collect())
        }
        "uniform" => {
            not_for("skew", "uniform")?;
            not_for("hot_keys", "uniform")?;
            not_for("hot_fraction", "uniform")?;
            Ok(vec![WorkloadKind::Uniform])
        }
        "hotspot" => {
            not_for("skew", "hotspot")?;
            let hot_keys = doc
                .scalar(section, "hot_keys")?
                .ok_or_else(|| ConfigError::at(kind_entry.line, format!("missing `{}`", qualified(section, "hot_keys"))))?;
            let hot_fraction = doc.scalar(section, "hot_fraction")?.ok_or_else(|| {
                ConfigError::at(kind_entry.line, format!("missing `{}`", qualified(section, "hot_fraction")))
            })?;
            Ok(vec![WorkloadKind::HotSpot { hot_keys, hot_fraction }])
        }
        other => Err(ConfigError::at(
            kind_entry.line,
            format!("unknown workload kind `{other}` (expected zipfian, uniform or hotspot)"),
        )),
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str, scale: Scale) -> Result<ExperimentConfig, ConfigError> {
    let doc = Document::parse(text)?;
    let mode: Mode = match doc.get("", "mode") {
        None => return Err(ConfigError::general("missing `mode`")),
        Some(e) => e.value.parse().map_err(|m: String| ConfigError::at(e.line, m))?,
    };
    if !doc.sections.contains_key("workload") {
        return Err(ConfigError::general("missing `[workload]` section"));
    }

    let workloads = workload_kinds(&doc, "workload", mode != Mode::ResizeTrace)?;
    let read_ratio = doc.scalar("workload", "read_ratio")?.unwrap_or(DEFAULT_READ_RATIO);
    let swap = match (doc.get("workload", "swap_at"), doc.sections.get("swap")) {
        (None, None) => None,
        (Some(e), None) => {
            return Err(ConfigError::at(e.line, "`workload.swap_at` needs a `[swap]` section"));
        }
        (None, Some(&line)) => return Err(ConfigError::at(line, "`[swap]` needs `workload.swap_at`")),
        (Some(_), Some(_)) => {
            let kind = workload_kinds(&doc, "swap", false)?.remove(0);
            Some(SwapConfig {
                kind,
                read_ratio: doc.scalar("swap", "read_ratio")?.unwrap_or(read_ratio),
                at: doc.scalar("workload", "swap_at")?.unwrap_or(0),
            })
        }
    };

    let default_policies = match mode {
        Mode::ResizeTrace => vec![PolicyKind::Cot],
        Mode::TrackerSweep => vec![PolicyKind::Cot, PolicyKind::Lru2],
        Mode::ImbalanceSearch => vec![
            PolicyKind::Lru,
            PolicyKind::Lfu,
            PolicyKind::Arc,
            PolicyKind::Lru2,
            PolicyKind::Cot,
        ],
        Mode::HitRateSweep => PolicyKind::ALL.to_vec(),
    };
    let policies = doc.list("policy", "policies")?.unwrap_or(default_policies);
    let default_cache = match mode {
        Mode::ImbalanceSearch => doubling(1, 65_536),
        Mode::TrackerSweep => vec![64],
        _ => doubling(2, 1024),
    };
    let cache_lines = doc.list("policy", "cache_lines")?.unwrap_or(default_cache);
    let tracker_lines = doc.list("policy", "tracker_lines")?.unwrap_or_else(|| doubling(128, 4096));

    let defaults = ResizerConfig::default();
    let resizer = ResizerConfig {
        target_imbalance: doc.scalar("resizer", "target_imbalance")?.unwrap_or(defaults.target_imbalance),
        epsilon: doc.scalar("resizer", "epsilon")?.unwrap_or(defaults.epsilon),
        band: doc.scalar("resizer", "band")?.unwrap_or(defaults.band),
        warmup_epochs: doc.scalar("resizer", "warmup")?.unwrap_or(defaults.warmup_epochs),
        gain_threshold: doc.scalar("resizer", "gain_threshold")?.unwrap_or(defaults.gain_threshold),
        min_cache: doc.scalar("resizer", "min_cache")?.unwrap_or(defaults.min_cache),
        min_tracker: doc.scalar("resizer", "min_tracker")?.unwrap_or(defaults.min_tracker),
        max_cache: doc.scalar("resizer", "max_cache")?.unwrap_or(defaults.max_cache),
        max_ratio: doc.scalar("resizer", "max_ratio")?.unwrap_or(defaults.max_ratio),
        initial_cache: doc.scalar("resizer", "cache")?.unwrap_or(defaults.initial_cache),
        initial_tracker: doc.scalar("resizer", "tracker")?.unwrap_or(defaults.initial_tracker),
        initial_epoch: doc.scalar("resizer", "epoch")?.unwrap_or(defaults.initial_epoch),
    };
    let signal = match doc.get("resizer", "signal") {
        None => SignalScope::default(),
        Some(e) => match e.value.as_str() {
            "cluster" => SignalScope::Cluster,
            "front_end" => SignalScope::FrontEnd,
            other => {
                return Err(ConfigError::at(
                    e.line,
                    format!("unknown signal `{other}` (expected cluster or front_end)"),
                ))
            }
        },
    };

    let config = ExperimentConfig {
        mode,
        seed: doc.scalar("", "seed")?.unwrap_or(42),
        front_ends: doc.scalar("", "front_ends")?.unwrap_or(20),
        accesses: doc.scalar("", "accesses")?.unwrap_or(scale.accesses()),
        key_space: doc.scalar("workload", "key_space")?.unwrap_or(scale.key_space()),
        read_ratio,
        workloads,
        swap,
        policies,
        cache_lines,
        tracker_lines,
        tracker_ratio: doc.scalar("policy", "tracker_ratio")?,
        shards: doc.scalar("cluster", "shards")?.unwrap_or(8),
        vnodes: doc.scalar("cluster", "vnodes")?.unwrap_or(EXPERIMENT_VNODES),
        resizer,
        signal,
        signal_window: doc.scalar("resizer", "signal_window")?.unwrap_or(5),
        trace_front_end: doc.scalar("resizer", "trace_front_end")?.unwrap_or(0),
        full_curve: doc.scalar("", "full_curve")?.unwrap_or(false),
        output: doc.get("", "output").map_or_else(|| mode.name().to_string(), |e| e.value.clone()),
    };
    validate(&config, &doc)?;
    Ok(config)
}

fn validate(c: &ExperimentConfig, doc: &Document) -> Result<(), ConfigError> {
    let fail = |section: &str, key: &str, msg: String| {
        Err(ConfigError {
            line: doc.line(section, key),
            message: msg,
        })
    };
    if c.front_ends == 0 {
        return fail("", "front_ends", "`front_ends` must be positive".into());
    }
    if c.accesses == 0 {
        return fail("", "accesses", "`accesses` must be positive".into());
    }
    if c.trace_front_end >= c.front_ends {
        return fail(
            "resizer",
            "trace_front_end",
            format!("`resizer.trace_front_end` must be below front_ends ({})", c.front_ends),
        );
    }
    if c.signal_window == 0 {
        return fail("resizer", "signal_window", "`resizer.signal_window` must be positive".into());
    }
    if c.shards == 0 {
        return fail("cluster", "shards", "`cluster.shards` must be positive".into());
    }
    if c.shards > u32::from(u16::MAX) {
        return fail("cluster", "shards", "`cluster.shards` must be at most 65535".into());
    }
    if c.vnodes == 0 {
        return fail("cluster", "vnodes", "`cluster.vnodes` must be positive".into());
    }
    if c.key_space > 100_000_000 {
        return fail("workload", "key_space", "`workload.key_space` must be at most 100000000".into());
    }
    for kind in &c.workloads {
        let spec = crate::workload::WorkloadSpec {
            kind: *kind,
            key_space: c.key_space,
            read_ratio: c.read_ratio,
            seed: c.seed,
            total_accesses: c.accesses,
        };
        if let Err(e) = spec.validate() {
            return fail("workload", "kind", format!("workload: {e}"));
        }
    }
    if let Some(swap) = &c.swap {
        let spec = crate::workload::WorkloadSpec {
            kind: swap.kind,
            key_space: c.key_space,
            read_ratio: swap.read_ratio,
            seed: c.seed,
            total_accesses: c.accesses,
        };
        if let Err(e) = spec.validate() {
            return fail("swap", "kind", format!("swap: {e}"));
        }
        if swap.at == 0 || swap.at >= c.accesses {
            return fail(
                "workload",
                "swap_at",
                format!("`workload.swap_at` must lie in (0, accesses = {})", c.accesses),
            );
        }
    }
    if let Some(r) = c.tracker_ratio {
        if r < 2 {
            return fail("policy", "tracker_ratio", "`policy.tracker_ratio` must be at least 2".into());
        }
    }
    if c.mode == Mode::TrackerSweep {
        if c.cache_lines.len() != 1 {
            return fail(
                "policy",
                "cache_lines",
                "tracker_sweep takes exactly one `policy.cache_lines` value".into(),
            );
        }
        if let Some(&k) = c.tracker_lines.iter().find(|&&k| k <= c.cache_lines[0]) {
            return fail(
                "policy",
                "tracker_lines",
                format!("`policy.tracker_lines` value {k} must exceed the cache size {}", c.cache_lines[0]),
            );
        }
        if let Some(p) = c.policies.iter().find(|p| !p.uses_tracker()) {
            return fail(
                "policy",
                "policies",
                format!("tracker_sweep only applies to CoT and LRU2, not {p}"),
            );
        }
    } else if doc.line("policy", "tracker_lines").is_some() {
        return fail(
            "policy",
            "tracker_lines",
            "`policy.tracker_lines` only applies to tracker_sweep".into(),
        );
    }
    if c.mode == Mode::ResizeTrace && c.policies != [PolicyKind::Cot] {
        return fail("policy", "policies", "resize_trace only runs CoT".into());
    }
    if c.mode != Mode::ResizeTrace && c.swap.is_some() {
        return fail("workload", "swap_at", "a workload swap only applies to resize_trace".into());
    }
    if let Err(e) = c.resizer.validate() {
        return Err(ConfigError::general(format!("resizer: {e}")));
    }
    if c.output.is_empty() || c.output.contains(['/', '\\']) {
        return fail("", "output", "`output` must be a plain file prefix".into());
    }
    Ok(())
}
