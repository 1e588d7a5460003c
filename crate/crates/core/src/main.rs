use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use coopnoma::mcsim::SamplingMode;
use coopnoma::plot::plot_script;
use coopnoma::scenario::{load_config, parse_range, Scenario};
use coopnoma::sweep::{run_sweep, to_csv, EngineSet};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Analytic,
    Mc,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Joint,
    Independent,
}

/// Sweep outage probability and throughput of relay-assisted cooperative NOMA.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    /// Scenario file (TOML). Omitted keys use the reference scenario.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Transmit SNR grid in dB, START:STOP:STEP.
    #[arg(long, value_name = "START:STOP:STEP")]
    sweep_gamma0_db: Option<String>,

    /// Monte-Carlo trials per sweep point.
    #[arg(long)]
    trials: Option<u64>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long, value_enum)]
    engine: Option<EngineArg>,

    /// Monte-Carlo sampling of the paired gains.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,

    /// Add non-relaying comparison rows.
    #[arg(long)]
    baseline: bool,

    /// CSV output path; stdout when omitted.
    #[arg(long, value_name = "CSV_PATH")]
    out: Option<PathBuf>,

    /// Also write a matplotlib script that plots the sweep.
    #[arg(long, value_name = "SCRIPT_PATH")]
    plot: Option<PathBuf>,
}

fn apply_overrides(s: &mut Scenario, args: &Args) -> coopnoma::Result<()> {
    if let Some(range) = &args.sweep_gamma0_db {
        s.sweep.gamma0_db = parse_range(range)?;
    }
    if let Some(trials) = args.trials {
        s.mc.trials = trials;
    }
    if let Some(seed) = args.seed {
        s.mc.seed = seed;
    }
    if let Some(engine) = args.engine {
        s.sweep.engines = match engine {
            EngineArg::Analytic => EngineSet {
                analytic: true,
                mc: false,
            },
            EngineArg::Mc => EngineSet {
                analytic: false,
                mc: true,
            },
            EngineArg::Both => EngineSet::default(),
        };
    }
    if let Some(mode) = args.mode {
        s.mc.mode = match mode {
            ModeArg::Joint => SamplingMode::Joint,
            ModeArg::Independent => SamplingMode::IndependentMarginals,
        };
    }
    if args.baseline {
        s.sweep.baseline = true;
    }
    s.validate()
}

fn run(args: Args) -> Result<(), String> {
    let mut scenario = match &args.config {
        Some(path) => load_config(path).map_err(|e| e.to_string())?,
        None => Scenario::default(),
    };
    apply_overrides(&mut scenario, &args).map_err(|e| e.to_string())?;

    let rows = run_sweep(&scenario).map_err(|e| e.to_string())?;
    let csv = to_csv(&rows);
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| format!("writing {}: {e}", path.display()))?
        }
        None => print!("{csv}"),
    }
    if let Some(path) = &args.plot {
        let script = plot_script(&csv, scenario.sweep.outputs).map_err(|e| e.to_string())?;
        std::fs::write(path, script).map_err(|e| format!("writing {}: {e}", path.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
