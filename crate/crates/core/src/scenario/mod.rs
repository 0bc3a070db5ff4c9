//! Config-driven scenarios: JSON schema, presets, per-mode runners and the
//! artifact writer used by the command-line front end.

mod config;
mod modes;
mod presets;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub use config::*;
pub use modes::{
    build_scenario, design_points, fields_csv, oracle_comparisons, parity_run, simulate_config, sweep_rows,
    AnalyticMode, CoefficientComparison, DesignMode, ModeRunner, OracleComparison, ParityMode, PerturbativeMode,
    RunSummary, SimulateMode, Simulated, SweepMode, ValidateMode, ValidateSummary,
};
pub use presets::{preset, preset_dir, preset_names};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    /// Where artifacts go; nothing is written when absent.
    pub out_dir: Option<PathBuf>,
    /// Rayon worker count; `None` keeps the global pool.
    pub workers: Option<usize>,
    /// Multiplies sample and step counts.
    pub refine: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            out_dir: None,
            workers: None,
            refine: 1,
        }
    }
}

/// What a mode runner sees.
pub struct RunContext<'a> {
    pub config: &'a ScenarioConfig,
    /// Relative data paths in the config resolve against this.
    pub base_dir: &'a Path,
    pub options: &'a RunOptions,
}

/// Everything one run produced, before it touches the disk.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: serde_json::Value,
    /// One-line human summary.
    pub line: String,
    /// `(file name, bytes)`, written in order.
    pub artifacts: Vec<(String, Vec<u8>)>,
}

#[derive(Debug, Clone, Serialize)]
struct SummaryFile<'a> {
    name: &'a str,
    mode: Mode,
    refine: usize,
    wall_time_s: f64,
    results: &'a serde_json::Value,
}

/// Mode name to runner.
pub struct ModeRegistry {
    runners: BTreeMap<Mode, Box<dyn ModeRunner>>,
}

impl Default for ModeRegistry {
    fn default() -> Self {
        let mut r = Self {
            runners: BTreeMap::new(),
        };
        r.register(Box::new(SimulateMode));
        r.register(Box::new(AnalyticMode));
        r.register(Box::new(PerturbativeMode));
        r.register(Box::new(DesignMode));
        r.register(Box::new(ParityMode));
        r.register(Box::new(SweepMode));
        r.register(Box::new(ValidateMode));
        r
    }
}

impl ModeRegistry {
    pub fn register(&mut self, runner: Box<dyn ModeRunner>) {
        self.runners.insert(runner.mode(), runner);
    }

    pub fn get(&self, mode: Mode) -> Result<&dyn ModeRunner> {
        self.runners
            .get(&mode)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::Schema(format!("no runner registered for mode `{}`", mode.as_str())))
    }

    pub fn modes(&self) -> Vec<Mode> {
        self.runners.keys().copied().collect()
    }
}

/// Runs `config` and, when `options.out_dir` is set, writes its artifacts
/// plus `summary.json` and a copy of the effective config.
pub fn run(config: &ScenarioConfig, base_dir: &Path, options: &RunOptions) -> Result<RunOutput> {
    config.validate()?;
    if options.refine == 0 {
        return Err(Error::invalid("refine must be at least 1"));
    }
    let registry = ModeRegistry::default();
    let runner = registry.get(config.mode)?;
    let ctx = RunContext {
        config,
        base_dir,
        options,
    };
    let start = Instant::now();
    let out = match options.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::invalid(format!("cannot start {n} workers: {e}")))?
            .install(|| runner.run(&ctx))?,
        None => runner.run(&ctx)?,
    };
    let wall = start.elapsed().as_secs_f64();
    if let Some(dir) = &options.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, bytes: &[u8]| {
            let p = dir.join(name);
            std::fs::write(&p, bytes).map_err(|e| Error::io(&p, e))
        };
        for (name, bytes) in &out.artifacts {
            write(name, bytes)?;
        }
        let summary = SummaryFile {
            name: &config.name,
            mode: config.mode,
            refine: options.refine,
            wall_time_s: wall,
            results: &out.summary,
        };
        let text = serde_json::to_string_pretty(&summary).expect("summary serialises");
        write("summary.json", text.as_bytes())?;
        write("config.json", config.to_json().as_bytes())?;
    }
    Ok(out)
}

/// Loads a config file and runs it with paths relative to its directory.
pub fn run_file(path: &Path, options: &RunOptions) -> Result<(ScenarioConfig, RunOutput)> {
    let cfg = ScenarioConfig::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let out = run(&cfg, base, options)?;
    Ok((cfg, out))
}
