use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cot_core::harness::config::KEY_REFERENCE;
use cot_core::harness::{parse_config, presets, run_experiment, ExperimentConfig, HarnessError, Scale};

#[derive(Debug, Parser)]
#[command(
    name = "cot-bench",
    version,
    about = "Front-end cache experiments: hit-rate sweeps, imbalance search, elastic resize traces",
    after_long_help = footer()
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Overrides the seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for CSV output.
    #[arg(long, global = true, default_value = "results")]
    out_dir: PathBuf,

    /// Defaults to 1,000,000 keys and 10,000,000 accesses instead of 100,000 and 2,000,000.
    #[arg(long, global = true)]
    paper_scale: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Runs the experiment described by a config file.
    Run { config: PathBuf },
    /// Runs a built-in sweep.
    Sweep {
        #[arg(long, value_enum, default_value_t = SweepKind::HitRate)]
        kind: SweepKind,
    },
    /// Runs the built-in elastic resize trace (Zipf 1.2, then uniform).
    Trace,
    /// Prints a built-in config, a starting point for `run`.
    Preset {
        #[arg(value_enum)]
        kind: PresetKind,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepKind {
    /// Hit rate against cache size for every policy.
    HitRate,
    /// Smallest cache per policy meeting the imbalance target.
    Imbalance,
    /// Hit rate against tracker size.
    Tracker,
    /// Relative server load against cache size.
    LoadCurve,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetKind {
    HitRate,
    Imbalance,
    Tracker,
    LoadCurve,
    Trace,
}

impl PresetKind {
    fn text(self) -> &'static str {
        match self {
            PresetKind::HitRate => presets::HIT_RATE_SWEEP,
            PresetKind::Imbalance => presets::IMBALANCE_SEARCH,
            PresetKind::Tracker => presets::TRACKER_SWEEP,
            PresetKind::LoadCurve => presets::LOAD_CURVE,
            PresetKind::Trace => presets::RESIZE_TRACE,
        }
    }
}

fn footer() -> String {
    format!(
        "Exit status: 0 on success, 1 on a configuration error, 2 on a runtime failure.\n\n\
         Config keys and defaults:\n{KEY_REFERENCE}"
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(HarnessError::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), HarnessError> {
    let scale = if cli.paper_scale { Scale::Full } else { Scale::Desk };
    let (text, origin) = match &cli.command {
        Command::Run { config } => match fs::read_to_string(config) {
            Ok(text) => (text, config.display().to_string()),
            Err(e) => {
                return Err(HarnessError::Config(cot_core::harness::ConfigError {
                    line: None,
                    message: format!("cannot read {}: {e}", config.display()),
                }))
            }
        },
        Command::Sweep { kind } => {
            let preset = match kind {
                SweepKind::HitRate => PresetKind::HitRate,
                SweepKind::Imbalance => PresetKind::Imbalance,
                SweepKind::Tracker => PresetKind::Tracker,
                SweepKind::LoadCurve => PresetKind::LoadCurve,
            };
            (preset.text().to_string(), "built-in sweep".to_string())
        }
        Command::Trace => (PresetKind::Trace.text().to_string(), "built-in trace".to_string()),
        Command::Preset { kind } => {
            print!("{}", kind.text());
            return Ok(());
        }
    };
    let mut config: ExperimentConfig = parse_config(&text, scale).map_err(|mut e| {
        e.message = format!("{origin}: {}", e.message);
        e
    })?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let output = run_experiment(&config)?;
    let path = output.write_to(&cli.out_dir)?;
    print!("{}", output.summary());
    println!("wrote {}", path.display());
    Ok(())
}
