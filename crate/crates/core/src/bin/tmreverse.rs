use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tmreverse::scenario::{preset, preset_dir, preset_names, run, Mode, RunOptions, ScenarioConfig};
use tmreverse::{Error, Result};

/// Time reversal of pulse envelopes by short-pump frequency conversion.
#[derive(Parser)]
#[command(name = "tmreverse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config in whatever mode it declares.
    Run(RunArgs),
    /// Coupled-mode integration (or the engine named in the config).
    Simulate(RunArgs),
    /// Closed-form beam-splitter map only.
    Analytic(RunArgs),
    /// First-order spectral transfer.
    Perturbative(RunArgs),
    /// Dispersion-based device design.
    Design(RunArgs),
    /// Two-stage temporal-mode parity sorter.
    Parity(RunArgs),
    /// Parameter sweep over coupled-mode runs.
    Sweep(RunArgs),
    /// Oracle comparison and convergence checks.
    Validate(RunArgs),
    /// Print a built-in preset config.
    Preset { name: String },
    /// List built-in presets.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config (JSON).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset instead of a config file.
    #[arg(long)]
    preset: Option<String>,
    /// Directory for CSV and JSON artifacts.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads for sweeps and comparisons.
    #[arg(long)]
    workers: Option<usize>,
    /// Multiply sample and step counts.
    #[arg(long, default_value_t = 1)]
    refine: usize,
}

fn execute(args: &RunArgs, expected: Option<Mode>) -> Result<()> {
    let (cfg, base) = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let cfg = ScenarioConfig::load(path)?;
            (cfg, path.parent().map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")))
        }
        (None, Some(name)) => (preset(name)?, preset_dir()),
        (None, None) => return Err(Error::Schema("either --config or --preset is required".into())),
    };
    if let Some(mode) = expected {
        // `simulate` also accepts analytic configs: both read the same section
        let ok = cfg.mode == mode || (mode == Mode::Simulate && cfg.mode == Mode::Analytic);
        if !ok {
            return Err(Error::Schema(format!(
                "config declares mode `{}` but `{}` was requested",
                cfg.mode.as_str(),
                mode.as_str()
            )));
        }
    }
    let options = RunOptions {
        out_dir: args.out_dir.clone(),
        workers: args.workers,
        refine: args.refine,
    };
    let out = run(&cfg, &base, &options)?;
    println!("{} [{}] {}", cfg.name, cfg.mode.as_str(), out.line);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => execute(a, None),
        Command::Simulate(a) => execute(a, Some(Mode::Simulate)),
        Command::Analytic(a) => execute(a, Some(Mode::Analytic)),
        Command::Perturbative(a) => execute(a, Some(Mode::Perturbative)),
        Command::Design(a) => execute(a, Some(Mode::Design)),
        Command::Parity(a) => execute(a, Some(Mode::Parity)),
        Command::Sweep(a) => execute(a, Some(Mode::Sweep)),
        Command::Validate(a) => execute(a, Some(Mode::Validate)),
        Command::Preset { name } => preset(name).map(|c| println!("{}", c.to_json())),
        Command::Presets => {
            for name in preset_names() {
                let c = preset(name).expect("built-in presets parse");
                println!("{name:16} {:12} {}", c.mode.as_str(), c.description);
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
