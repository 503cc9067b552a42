use std::fs;
use std::process::{Command, Output};

fn cot_bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cot-bench")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL: &str = "\
mode = hit_rate_sweep
output = small
front_ends = 2
accesses = 20000
[workload]
kind = zipfian
skew = 1.2
key_space = 5000
[policy]
policies = LRU, CoT
cache_lines = 8, 64
";

#[test]
fn run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    fs::write(&config, SMALL).unwrap();
    let out_dir = dir.path().join("out");
    let out = cot_bench(&["run", config.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(out_dir.join("small.csv")).unwrap();
    assert!(csv.starts_with("policy,skew,cache_lines,tracker_lines,accesses,hits,hit_rate\n"));
    assert_eq!(csv.lines().count(), 5);
    assert!(stdout(&out).contains("wrote "));

    // Same config, same bytes; another seed, other bytes.
    let again = dir.path().join("again");
    cot_bench(&["run", config.to_str().unwrap(), "--out-dir", again.to_str().unwrap()]);
    assert_eq!(csv, fs::read_to_string(again.join("small.csv")).unwrap());
    let reseeded = dir.path().join("reseeded");
    let out = cot_bench(&["run", config.to_str().unwrap(), "--seed", "4294967338", "--out-dir", reseeded.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_ne!(csv, fs::read_to_string(reseeded.join("small.csv")).unwrap());
}

#[test]
fn config_errors_exit_one_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "mode = hit_rate_sweep\n[workload]\nkind = zipfian\nskew = 1.2\nskew = 0.9\n").unwrap();
    let out = cot_bench(&["run", config.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 5"), "{}", stderr(&out));

    let out = cot_bench(&["run", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let out = cot_bench(&["sweep", "--kind", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    fs::write(&config, SMALL).unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = cot_bench(&["run", config.to_str().unwrap(), "--out-dir", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn help_lists_commands_and_config_keys() {
    let out = cot_bench(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for needle in ["run", "sweep", "trace", "--paper-scale", "--seed", "--out-dir", "Exit status", "target_imbalance"] {
        assert!(text.contains(needle), "help lacks {needle}");
    }
}

#[test]
fn presets_round_trip_through_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = cot_bench(&["preset", "trace"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("mode = resize_trace"));
    // Shrink the preset so it runs quickly.
    let small = text.replace("accesses = 26000000", "accesses = 400000").replace("swap_at = 15000000", "swap_at = 200000");
    let config = dir.path().join("trace.toml");
    fs::write(&config, small).unwrap();
    let out = cot_bench(&["run", config.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(csv.starts_with("epoch,C,K,E,I_c,alpha_c,alpha_kc,alpha_t,action\n"));
}
