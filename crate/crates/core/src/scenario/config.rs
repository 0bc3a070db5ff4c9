use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytic::{PumpPulse, ThreeWaveParams, DEFAULT_CONDITION_FACTOR};
use crate::envelope::{io::load_envelope_csv, ComplexEnvelope, TimeGrid};
use crate::error::{Error, Result};
use crate::pulse::PulseSpec;
use crate::quantum::DEFAULT_CUTOFF;
use crate::solver::{MapRecording, SimulationGrid};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Simulate,
    Analytic,
    Perturbative,
    Design,
    Parity,
    Sweep,
    Validate,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::Simulate,
        Mode::Analytic,
        Mode::Perturbative,
        Mode::Design,
        Mode::Parity,
        Mode::Sweep,
        Mode::Validate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Analytic => "analytic",
            Mode::Perturbative => "perturbative",
            Mode::Design => "design",
            Mode::Parity => "parity",
            Mode::Sweep => "sweep",
            Mode::Validate => "validate",
        }
    }

    /// Config section the mode reads.
    fn section(self) -> &'static str {
        match self {
            Mode::Simulate | Mode::Analytic => "simulation",
            Mode::Perturbative => "perturbative",
            Mode::Design => "design",
            Mode::Parity => "parity",
            Mode::Sweep => "sweep",
            Mode::Validate => "validate",
        }
    }
}

/// Time window and step counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Width of the periodic computational window.
    pub span: f64,
    pub samples: usize,
    #[serde(default = "default_z_steps")]
    pub z_steps: usize,
    /// Width of the plotted window; sets the lead-in margin of the default
    /// signal placement.
    #[serde(default = "default_display_span")]
    pub display_span: f64,
}

fn default_z_steps() -> usize {
    2000
}

fn default_display_span() -> f64 {
    10.0
}

impl GridConfig {
    pub fn time_grid(&self, refine: usize) -> Result<TimeGrid> {
        if !(self.span > 0.0) || self.samples < 2 {
            return Err(Error::Schema(format!(
                "grid needs span > 0 and at least 2 samples (got {}, {})",
                self.span, self.samples
            )));
        }
        TimeGrid::centered(self.span, self.samples * refine)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PumpShapeConfig {
    Gaussian { amplitude: f64, half_duration: f64 },
    Rectangle { height: f64, width: f64 },
    /// Envelope CSV, interpreted relative to the pump centre.
    Table { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpConfig {
    pub shape: PumpShapeConfig,
    #[serde(default)]
    pub center: f64,
}

impl PumpConfig {
    pub fn build(&self, base_dir: &Path) -> Result<PumpPulse> {
        let p = match &self.shape {
            PumpShapeConfig::Gaussian {
                amplitude,
                half_duration,
            } => PumpPulse::gaussian(*amplitude, *half_duration),
            PumpShapeConfig::Rectangle { height, width } => PumpPulse::rectangle(*height, *width),
            PumpShapeConfig::Table { path } => PumpPulse::tabulated(load_envelope_csv(&resolve(base_dir, path))?),
        };
        let p = p.centered_at(self.center);
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineChoice {
    SplitStep,
    Analytic,
}

impl EngineChoice {
    pub fn name(self) -> &'static str {
        match self {
            EngineChoice::SplitStep => "split_step",
            EngineChoice::Analytic => "analytic",
        }
    }
}

/// Inputs of one coupled-mode run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub params: ThreeWaveParams,
    pub pump: PumpConfig,
    pub signal: PulseSpec,
    /// Input in the converted band; absent means vacuum.
    #[serde(default)]
    pub converted: Option<PulseSpec>,
    pub grid: GridConfig,
    /// Collision axis; defaults to the pump centre.
    #[serde(default)]
    pub axis: Option<f64>,
    #[serde(default = "default_engine")]
    pub engine: EngineChoice,
    #[serde(default)]
    pub record_map: Option<MapRecording>,
    #[serde(default = "default_factor")]
    pub condition_factor: f64,
}

fn default_engine() -> EngineChoice {
    EngineChoice::SplitStep
}

fn default_factor() -> f64 {
    DEFAULT_CONDITION_FACTOR
}

impl SimulationConfig {
    /// Signal centre that lets the input clear the pump by the end of the
    /// medium: half the walk-off before the axis, plus a tenth of the
    /// display window.
    pub fn default_signal_center(&self, axis: f64) -> f64 {
        let lead = 0.5 * self.params.sigma_s.abs() * self.params.length + 0.1 * self.grid.display_span;
        axis - self.params.sigma_s.signum() * lead
    }

    pub fn grid(&self, refine: usize) -> Result<SimulationGrid> {
        SimulationGrid::new(self.grid.time_grid(refine)?, self.grid.z_steps * refine, self.params.length)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbativeConfig {
    pub sigma_s: f64,
    pub sigma_r: f64,
    pub length: f64,
    #[serde(default = "one")]
    pub coupling: f64,
    pub pump: PumpConfig,
    pub signal: PulseSpec,
    pub grid: GridConfig,
    /// Also evaluate the finite-length phase-matching integral.
    #[serde(default)]
    pub finite_length: bool,
    #[serde(default = "one")]
    pub beta_p_prime: f64,
    #[serde(default = "default_factor")]
    pub condition_factor: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    /// Sum-frequency generation over a list of pump wavelengths.
    Sfg,
    /// Four-wave Bragg scattering with two pumps.
    BraggScattering,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    /// Material JSON, relative to the config file.
    pub material: PathBuf,
    pub process: Process,
    pub lambda_s: f64,
    /// Pump wavelengths for `sfg`.
    #[serde(default)]
    pub pumps: Vec<f64>,
    /// Long pump for `bragg_scattering`.
    #[serde(default)]
    pub lambda_p1: Option<f64>,
    /// Short pump for `bragg_scattering`.
    #[serde(default)]
    pub lambda_p2: Option<f64>,
    /// Medium length in m.
    pub length: f64,
}

/// Optional coupled-mode realisation of the two-stage sorter. The first
/// stage's outputs are delayed and phased, then collide with a second pump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoStageConfig {
    pub params: ThreeWaveParams,
    pub pump: PumpConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub delay_s: f64,
    #[serde(default)]
    pub delay_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParityConfig {
    pub signal: PulseSpec,
    pub grid: GridConfig,
    #[serde(default = "half")]
    pub rho_squared: f64,
    #[serde(default)]
    pub interstage_phase: f64,
    #[serde(default)]
    pub axis: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default)]
    pub two_stage: Option<TwoStageConfig>,
}

fn half() -> f64 {
    0.5
}

fn default_cutoff() -> usize {
    DEFAULT_CUTOFF
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Gamma,
    SigmaS,
    SigmaR,
    PumpAmplitude,
    PumpHalfDuration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: SimulationConfig,
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Keep the pump area fixed when sweeping its duration.
    #[serde(default)]
    pub fixed_area: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub samples: usize,
    pub z_steps: usize,
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_levels() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub base: SimulationConfig,
    /// Pump duration scale factors at fixed area for the oracle comparison.
    #[serde(default = "default_scales")]
    pub pump_scales: Vec<f64>,
    #[serde(default)]
    pub convergence: Option<ConvergenceConfig>,
}

fn default_scales() -> Vec<f64> {
    vec![1.0, 0.5, 0.25]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbative: Option<PerturbativeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<ParityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validate: Option<ValidateConfig>,
}

fn missing(mode: Mode) -> Error {
    Error::Schema(format!("mode `{}` needs a `{}` section", mode.as_str(), mode.section()))
}

impl ScenarioConfig {
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Schema(format!("{context}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Structural checks that need no data files.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let present = [
            ("simulation", self.simulation.is_some()),
            ("perturbative", self.perturbative.is_some()),
            ("design", self.design.is_some()),
            ("parity", self.parity.is_some()),
            ("sweep", self.sweep.is_some()),
            ("validate", self.validate.is_some()),
        ];
        let wanted = self.mode.section();
        for (name, here) in present {
            if here && name != wanted {
                return Err(Error::Schema(format!(
                    "section `{name}` is not used by mode `{}`",
                    self.mode.as_str()
                )));
            }
        }
        if !present.iter().any(|(n, h)| *h && *n == wanted) {
            return Err(missing(self.mode));
        }
        if let Some(d) = &self.design {
            match d.process {
                Process::Sfg if d.pumps.is_empty() => {
                    return Err(Error::Schema("sfg design needs a non-empty `pumps` list".into()))
                }
                Process::BraggScattering if d.lambda_p1.is_none() || d.lambda_p2.is_none() => {
                    return Err(Error::Schema("bragg_scattering design needs `lambda_p1` and `lambda_p2`".into()))
                }
                _ => {}
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::Schema("sweep needs at least one value".into()));
            }
        }
        Ok(())
    }

    pub fn simulation(&self) -> Result<&SimulationConfig> {
        self.simulation.as_ref().ok_or_else(|| missing(self.mode))
    }
}

pub(crate) fn resolve(base_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

/// Samples an optional pulse, or vacuum.
pub(crate) fn sample_or_zero(
    spec: Option<&PulseSpec>,
    grid: &TimeGrid,
    default_center: f64,
    base_dir: &Path,
) -> Result<ComplexEnvelope> {
    match spec {
        Some(s) => s.sample(grid, default_center, base_dir),
        None => Ok(ComplexEnvelope::zeros(*grid)),
    }
}
