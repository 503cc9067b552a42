//! Built-in experiment configurations used by the command-line front-end.

/// Hit rate of every policy against cache size for three Zipf skews.
pub const HIT_RATE_SWEEP: &str = "\
mode = hit_rate_sweep
output = hit_rate

[workload]
kind = zipfian
skew = 0.9, 0.99, 1.2

[policy]
policies = LRU, LFU, ARC, LRU2, CoT, TPC
cache_lines = 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024
";

/// Smallest cache per policy that brings the back-end imbalance to 1.1.
pub const IMBALANCE_SEARCH: &str = "\
mode = imbalance_search
output = imbalance

[workload]
kind = zipfian
skew = 0.9, 0.99, 1.2

[policy]
policies = LRU, LFU, ARC, LRU2, CoT

[resizer]
target_imbalance = 1.1
";

/// Relative server load and imbalance against CoT cache size under heavy skew.
pub const LOAD_CURVE: &str = "\
mode = imbalance_search
output = load_curve
full_curve = true

[workload]
kind = zipfian
skew = 1.5

[policy]
policies = CoT
cache_lines = 1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048
tracker_ratio = 4

[resizer]
target_imbalance = 1.5
";

/// Hit rate against tracker size at a fixed cache size.
pub const TRACKER_SWEEP: &str = "\
mode = tracker_sweep
output = tracker

[workload]
kind = zipfian
skew = 0.99

[policy]
policies = CoT
cache_lines = 64
tracker_lines = 128, 256, 512, 1024, 2048, 4096
";

/// Elastic resizing from a two-line cache under Zipf 1.2, then a switch to
/// uniform traffic: 150 epochs of 5000 accesses per front-end before the
/// switch and 110 after.
pub const RESIZE_TRACE: &str = "\
mode = resize_trace
output = trace
accesses = 26000000

[workload]
kind = zipfian
skew = 1.2
swap_at = 15000000

[swap]
kind = uniform

[resizer]
target_imbalance = 1.1
epoch = 5000
cache = 2
tracker = 4
";

pub const ALL: [(&str, &str); 5] = [
    ("hit_rate", HIT_RATE_SWEEP),
    ("imbalance", IMBALANCE_SEARCH),
    ("load_curve", LOAD_CURVE),
    ("tracker", TRACKER_SWEEP),
    ("trace", RESIZE_TRACE),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{parse_config, Scale};

    #[test]
    fn presets_parse_at_both_scales() {
        for (name, text) in ALL {
            for scale in [Scale::Desk, Scale::Full] {
                parse_config(text, scale).unwrap_or_else(|e| panic!("{name}: {e}"));
            }
        }
    }
}
