use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{
    resolve, sample_or_zero, DesignConfig, EngineChoice, Mode, ParityConfig, PerturbativeConfig, Process,
    PumpShapeConfig, SimulationConfig, SweepConfig, SweepParameter, TwoStageConfig, ValidateConfig,
};
use super::{RunContext, RunOutput};
use crate::analytic::{
    check_reversal_conditions, conversion_coeffs, pump_area_complex, Bandwidths, ConditionReport, ConversionCoeffs,
};
use crate::dispersion::{bragg_scattering_point, load_model, sweep as design_sweep, write_sweep_csv, DesignPoint};
use crate::envelope::{
    aligned_fidelity, io::write_envelope_csv, parity_decompose, relative_l2, spectral_transform, AffineTimeMap,
    ComplexEnvelope, Interpolation, SpectralAmplitude, TimeGrid,
};
use crate::error::{Error, Result};
use crate::perturbative::{
    conversion_weight, delta_limit_check, finite_length_output, first_order_output, mirrored, spectral_fidelity,
    TransferSetup,
};
use crate::quantum::{beam_splitter_fock, hom_coincidence, parity_sorter, TwoModeState};
use crate::solver::{
    compute_metrics, convergence_study, ConvergenceReport, EngineOutput, EngineRegistry, FieldMap, Metrics, Scenario,
};

/// A runnable scenario mode.
pub trait ModeRunner: Send + Sync {
    fn mode(&self) -> Mode;
    fn run(&self, ctx: &RunContext) -> Result<RunOutput>;
}

fn envelope_bytes(e: &ComplexEnvelope) -> Vec<u8> {
    let mut buf = Vec::new();
    write_envelope_csv(e, &mut buf).expect("writing to memory");
    buf
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("summary serialises")
}

/// A coupled-mode scenario built from its config.
pub fn build_scenario(sim: &SimulationConfig, base_dir: &Path, refine: usize) -> Result<Scenario> {
    sim.params.validate()?;
    let grid = sim.grid(refine)?;
    let pump = sim.pump.build(base_dir)?;
    let axis = sim.axis.unwrap_or(pump.center);
    let s_in = sim.signal.sample(&grid.time, sim.default_signal_center(axis), base_dir)?;
    // the converted band enters from the opposite side
    let r_center = axis - sim.params.sigma_r.signum() * (sim.default_signal_center(axis) - axis).abs();
    let r_in = sample_or_zero(sim.converted.as_ref(), &grid.time, r_center, base_dir)?;
    let sc = Scenario {
        params: sim.params,
        pump,
        s_in,
        r_in,
        grid,
        axis,
        record_map: sim.record_map,
    };
    sc.validate()?;
    Ok(sc)
}

/// Closed-form coefficients next to their measured counterparts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientComparison {
    pub tau_analytic: f64,
    pub rho_analytic: f64,
    pub tau_measured: f64,
    pub rho_measured: f64,
    pub pump_area: f64,
    pub sigma_bar: f64,
    pub m: f64,
    #[serde(rename = "M_analytic")]
    pub magnification: f64,
}

/// Summary of one coupled-mode run; every figure is recomputable from the
/// dumped envelopes and flux profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub engine: &'static str,
    pub efficiency: f64,
    pub transmission: f64,
    pub reversal_fidelity: Option<f64>,
    pub reversal_offset: Option<f64>,
    pub mapped_fidelity: Option<f64>,
    #[serde(rename = "measured_M")]
    pub measured_m: Option<f64>,
    pub flux_error: f64,
    pub coefficients: Option<CoefficientComparison>,
    pub conditions: ConditionReport,
    pub warnings: Vec<String>,
}

pub struct Simulated {
    pub scenario: Scenario,
    pub output: EngineOutput,
    pub metrics: Metrics,
    pub summary: RunSummary,
}

fn coefficients(sc: &Scenario, metrics: &Metrics) -> Result<Option<(ConversionCoeffs, CoefficientComparison)>> {
    if sc.params.sigma_s == 0.0 || sc.params.sigma_r == 0.0 {
        return Ok(None);
    }
    let area = pump_area_complex(&sc.pump, f64::INFINITY)?;
    let eps = if area.im == 0.0 { area.re } else { area.norm() };
    let c = conversion_coeffs(&sc.params, eps)?;
    let cmp = CoefficientComparison {
        tau_analytic: c.tau,
        rho_analytic: c.rho,
        tau_measured: metrics.transmission.sqrt(),
        rho_measured: metrics.efficiency.sqrt(),
        pump_area: c.pump_area,
        sigma_bar: c.sigma_bar,
        m: c.m,
        magnification: c.magnification,
    };
    Ok(Some((c, cmp)))
}

pub fn simulate_config(sim: &SimulationConfig, engine: EngineChoice, base_dir: &Path, refine: usize) -> Result<Simulated> {
    let sc = build_scenario(sim, base_dir, refine)?;
    let registry = EngineRegistry::default();
    let out = registry.get(engine.name())?.run(&sc)?;
    let metrics = compute_metrics(&sc, &out.s_out, &out.r_out, &out.flux)?;
    let bw = Bandwidths {
        pump: sc.pump.bandwidth(),
        signal: sc.s_in.spectral_half_width(),
        converted: sc.s_in.spectral_half_width() * (sc.params.sigma_s / sc.params.sigma_r).abs(),
    };
    let conditions = check_reversal_conditions(&sc.params, &bw, 1.0, sim.condition_factor);
    let coeffs = coefficients(&sc, &metrics)?.map(|c| c.1);
    let summary = RunSummary {
        engine: engine.name(),
        efficiency: metrics.efficiency,
        transmission: metrics.transmission,
        reversal_fidelity: metrics.reversal_fidelity,
        reversal_offset: metrics.reversal_offset,
        mapped_fidelity: metrics.mapped_fidelity,
        measured_m: metrics.measured_m,
        flux_error: metrics.flux_error,
        coefficients: coeffs,
        conditions,
        warnings: out.warnings.clone(),
    };
    Ok(Simulated {
        scenario: sc,
        output: out,
        metrics,
        summary,
    })
}

/// `z,t,abs_s,abs_r,arg_s,arg_r` rows; the two end planes when no map was
/// recorded.
pub fn fields_csv(sc: &Scenario, out: &EngineOutput) -> Vec<u8> {
    let mut text = String::from("z,t,abs_s,abs_r,arg_s,arg_r\n");
    let mut row = |z: f64, t: f64, s: Complex64, r: Complex64| {
        let _ = writeln!(text, "{z},{t},{},{},{},{}", s.norm(), r.norm(), s.arg(), r.arg());
    };
    match &out.map {
        Some(FieldMap { z, t, s, r }) => {
            for (i, zi) in z.iter().enumerate() {
                for (j, tj) in t.iter().enumerate() {
                    row(*zi, *tj, s[i][j], r[i][j]);
                }
            }
        }
        None => {
            let ends = [(0.0, &sc.s_in, &sc.r_in), (sc.params.length, &out.s_out, &out.r_out)];
            for (z, s, r) in ends {
                for ((t, a), b) in sc.grid.time.times().zip(s.samples()).zip(r.samples()) {
                    row(z, t, *a, *b);
                }
            }
        }
    }
    text.into_bytes()
}

fn flux_csv(flux: &[(f64, f64)]) -> Vec<u8> {
    let mut text = String::from("z,flux\n");
    for (z, f) in flux {
        let _ = writeln!(text, "{z},{f}");
    }
    text.into_bytes()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |x| format!("{x:.6}"))
}

fn simulation_output(ctx: &RunContext, engine: EngineChoice) -> Result<RunOutput> {
    let sim = ctx.config.simulation()?;
    let s = simulate_config(sim, engine, ctx.base_dir, ctx.options.refine)?;
    let sum = &s.summary;
    let mut line = format!(
        "efficiency={:.6} reversal_fidelity={} measured_M={} flux_error={:.2e}",
        sum.efficiency,
        fmt_opt(sum.reversal_fidelity),
        fmt_opt(sum.measured_m),
        sum.flux_error
    );
    if let Some(c) = &sum.coefficients {
        let _ = write!(line, " tau_analytic={:.4} rho_analytic={:.4}", c.tau_analytic, c.rho_analytic);
    }
    Ok(RunOutput {
        summary: to_json(sum),
        line,
        artifacts: vec![
            ("fields.csv".into(), fields_csv(&s.scenario, &s.output)),
            ("flux.csv".into(), flux_csv(&s.output.flux)),
            ("s_in.csv".into(), envelope_bytes(&s.scenario.s_in)),
            ("r_in.csv".into(), envelope_bytes(&s.scenario.r_in)),
            ("s_out.csv".into(), envelope_bytes(&s.output.s_out)),
            ("r_out.csv".into(), envelope_bytes(&s.output.r_out)),
        ],
    })
}

pub struct SimulateMode;

impl ModeRunner for SimulateMode {
    fn mode(&self) -> Mode {
        Mode::Simulate
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        simulation_output(ctx, ctx.config.simulation()?.engine)
    }
}

pub struct AnalyticMode;

impl ModeRunner for AnalyticMode {
    fn mode(&self) -> Mode {
        Mode::Analytic
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        simulation_output(ctx, EngineChoice::Analytic)
    }
}

/// Pump sampled finely enough to cover `|m - 1|` times the signal band.
fn pump_spectrum(cfg: &PerturbativeConfig, signal_grid: &TimeGrid, base_dir: &Path) -> Result<SpectralAmplitude> {
    let pump = cfg.pump.build(base_dir)?;
    let m = cfg.sigma_s / cfg.sigma_r;
    let char_time = pump.characteristic_time();
    let dt = (char_time / 8.0).min(signal_grid.dt() / (m - 1.0).abs().max(1.0) / 1.5);
    let (lo, hi) = pump.support();
    let span = (hi - lo).max(40.0 * char_time) + 2.0 * pump.center.abs();
    let n = ((span / dt).ceil() as usize).next_power_of_two();
    let grid = TimeGrid::centered(n as f64 * dt, n)?;
    Ok(spectral_transform(&pump.sample(&grid)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct PerturbativeSummary {
    m: f64,
    pump_bandwidth: f64,
    signal_bandwidth: f64,
    bandwidth_ratio: f64,
    mirror_fidelity: f64,
    identity_fidelity: f64,
    finite_length_fidelity: Option<f64>,
    conversion_weight: f64,
    conditions: ConditionReport,
}

pub struct PerturbativeMode;

impl ModeRunner for PerturbativeMode {
    fn mode(&self) -> Mode {
        Mode::Perturbative
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let cfg = ctx
            .config
            .perturbative
            .as_ref()
            .ok_or_else(|| Error::Schema("missing `perturbative` section".into()))?;
        let grid = cfg.grid.time_grid(1)?;
        let signal = cfg.signal.sample(&grid, 0.0, ctx.base_dir)?;
        let spec_in = spectral_transform(&signal);
        let mut setup = TransferSetup::new(
            cfg.sigma_s,
            cfg.sigma_r,
            cfg.length,
            pump_spectrum(cfg, &grid, ctx.base_dir)?,
            cfg.coupling,
        )?;
        setup.beta_p_prime = cfg.beta_p_prime;
        let out = first_order_output(&spec_in, &setup)?;
        let mirror = mirrored(&spec_in)?;
        let finite = if cfg.finite_length {
            Some(finite_length_output(&spec_in, &setup)?)
        } else {
            None
        };
        // out shares the input grid only when |m| = 1
        let same_grid = out.same_grid(&spec_in);
        let fid = |a: &SpectralAmplitude, b: &SpectralAmplitude| -> Result<f64> {
            if same_grid {
                spectral_fidelity(a, b)
            } else {
                Ok(f64::NAN)
            }
        };
        let pump_bw = cfg.pump.build(ctx.base_dir)?.bandwidth();
        let sig_bw = signal.spectral_half_width();
        let bw = Bandwidths {
            pump: pump_bw,
            signal: sig_bw,
            converted: sig_bw * setup.m().abs(),
        };
        let summary = PerturbativeSummary {
            m: setup.m(),
            pump_bandwidth: pump_bw,
            signal_bandwidth: sig_bw,
            bandwidth_ratio: pump_bw / sig_bw,
            mirror_fidelity: fid(&out, &mirror)?,
            identity_fidelity: fid(&out, &spec_in)?,
            finite_length_fidelity: finite.as_ref().map(|f| spectral_fidelity(&out, f)).transpose()?,
            conversion_weight: conversion_weight(&spec_in, &setup)?,
            conditions: delta_limit_check(&setup, &bw, cfg.condition_factor),
        };
        let mut text = String::from("nu_in,re_in,im_in,nu_out,re_out,im_out");
        text.push_str(if finite.is_some() { ",re_finite,im_finite\n" } else { "\n" });
        let norm_in = spec_in.normalized();
        for j in 0..out.len() {
            let (a, b) = (norm_in.samples()[j], out.samples()[j]);
            let _ = write!(text, "{},{},{},{},{},{}", spec_in.frequency(j), a.re, a.im, out.frequency(j), b.re, b.im);
            if let Some(f) = &finite {
                let c = f.samples()[j];
                let _ = write!(text, ",{},{}", c.re, c.im);
            }
            text.push('\n');
        }
        let line = format!(
            "m={:.4} B_p/B_s={:.3} mirror_fidelity={:.6} identity_fidelity={:.6}",
            summary.m, summary.bandwidth_ratio, summary.mirror_fidelity, summary.identity_fidelity
        );
        Ok(RunOutput {
            summary: to_json(&summary),
            line,
            artifacts: vec![("spectrum.csv".into(), text.into_bytes())],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct Range {
    min: f64,
    max: f64,
}

fn range(v: impl Iterator<Item = f64>) -> Range {
    let (min, max) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    Range { min, max }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct DesignSummary {
    material: String,
    points: Vec<DesignPoint>,
    poling_period_um: Option<Range>,
    abs_m: Range,
    #[serde(rename = "M")]
    magnification: Range,
    t_max_s_ps: Range,
    t_max_r_ps: Range,
    all_feasible: bool,
}

pub fn design_points(cfg: &DesignConfig, base_dir: &Path) -> Result<(String, Vec<DesignPoint>)> {
    let model = load_model(&resolve(base_dir, &cfg.material))?;
    let points = match cfg.process {
        Process::Sfg => design_sweep(model.as_ref(), cfg.lambda_s, &cfg.pumps, cfg.length)?,
        Process::BraggScattering => vec![bragg_scattering_point(
            model.as_ref(),
            cfg.lambda_s,
            cfg.lambda_p1.expect("validated"),
            cfg.lambda_p2.expect("validated"),
            cfg.length,
        )?],
    };
    Ok((model.name().to_string(), points))
}

pub struct DesignMode;

impl ModeRunner for DesignMode {
    fn mode(&self) -> Mode {
        Mode::Design
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let cfg = ctx
            .config
            .design
            .as_ref()
            .ok_or_else(|| Error::Schema("missing `design` section".into()))?;
        let (material, points) = design_points(cfg, ctx.base_dir)?;
        let poling: Vec<f64> = points.iter().filter_map(|p| p.poling_period).collect();
        let summary = DesignSummary {
            material,
            poling_period_um: (!poling.is_empty()).then(|| range(poling.iter().copied())),
            abs_m: range(points.iter().map(|p| p.m.abs())),
            magnification: range(points.iter().map(|p| p.magnification)),
            t_max_s_ps: range(points.iter().map(|p| p.t_max_s)),
            t_max_r_ps: range(points.iter().map(|p| p.t_max_r)),
            all_feasible: points.iter().all(|p| p.feasible),
            points,
        };
        let mut csv = Vec::new();
        write_sweep_csv(&summary.points, &mut csv)?;
        let mut line = format!(
            "|m| in [{:.3}, {:.3}] M in [{:.3}, {:.3}] T_max_s in [{:.4}, {:.4}] ps T_max_r in [{:.4}, {:.4}] ps",
            summary.abs_m.min,
            summary.abs_m.max,
            summary.magnification.min,
            summary.magnification.max,
            summary.t_max_s_ps.min,
            summary.t_max_s_ps.max,
            summary.t_max_r_ps.min,
            summary.t_max_r_ps.max
        );
        if let Some(r) = &summary.poling_period_um {
            let _ = write!(line, " poling in [{:.3}, {:.3}] um", r.min, r.max);
        }
        Ok(RunOutput {
            summary: to_json(&summary),
            line,
            artifacts: vec![("sweep.csv".into(), csv)],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct TwoStageSummary {
    red_prob: f64,
    blue_prob: f64,
    stage1_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ParitySummary {
    tau: f64,
    rho: f64,
    interstage_phase: f64,
    even_weight: f64,
    odd_weight: f64,
    red_prob: f64,
    blue_prob: f64,
    hom_coincidence: f64,
    two_stage: Option<TwoStageSummary>,
}

fn two_stage(cfg: &TwoStageConfig, input: &ComplexEnvelope, phase: f64, base_dir: &Path, refine: usize) -> Result<TwoStageSummary> {
    let grid = crate::solver::SimulationGrid::new(cfg.grid.time_grid(refine)?, cfg.grid.z_steps * refine, cfg.params.length)?;
    if !grid.time.matches(input.grid()) {
        return Err(Error::Schema("two_stage grid must match the parity grid".into()));
    }
    let pump = cfg.pump.build(base_dir)?;
    let zero = ComplexEnvelope::zeros(grid.time);
    let stage = |s_in: ComplexEnvelope, r_in: ComplexEnvelope| -> Result<EngineOutput> {
        let sc = Scenario {
            params: cfg.params,
            pump: pump.clone(),
            s_in,
            r_in,
            grid,
            axis: pump.center,
            record_map: None,
        };
        EngineRegistry::default().get("split_step")?.run(&sc)
    };
    let one = stage(input.clone(), zero)?;
    let shift = |e: &ComplexEnvelope, d: f64, c: Complex64| e.remap(AffineTimeMap::delay(d), c, Interpolation::BandLimited);
    let s2 = shift(&one.s_out, cfg.delay_s, Complex64::new(1.0, 0.0))?;
    let r2 = shift(&one.r_out, cfg.delay_r, Complex64::from_polar(1.0, phase))?;
    let two = stage(s2, r2)?;
    let total = input.norm_sqr();
    Ok(TwoStageSummary {
        red_prob: two.s_out.norm_sqr() / total,
        blue_prob: two.r_out.norm_sqr() / total,
        stage1_efficiency: one.r_out.norm_sqr() / total,
    })
}

pub fn parity_run(cfg: &ParityConfig, base_dir: &Path, refine: usize) -> Result<(ComplexEnvelope, crate::quantum::SorterOutput)> {
    let grid = cfg.grid.time_grid(refine)?;
    let input = cfg.signal.sample(&grid, cfg.axis, base_dir)?;
    if !(0.0..=1.0).contains(&cfg.rho_squared) {
        return Err(Error::invalid(format!("rho_squared must lie in [0, 1], got {}", cfg.rho_squared)));
    }
    let (tau, rho) = ((1.0 - cfg.rho_squared).sqrt(), cfg.rho_squared.sqrt());
    let out = parity_sorter(&input, tau, rho, cfg.interstage_phase, cfg.axis)?;
    Ok((input, out))
}

pub struct ParityMode;

impl ModeRunner for ParityMode {
    fn mode(&self) -> Mode {
        Mode::Parity
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let cfg = ctx
            .config
            .parity
            .as_ref()
            .ok_or_else(|| Error::Schema("missing `parity` section".into()))?;
        let (input, out) = parity_run(cfg, ctx.base_dir, ctx.options.refine)?;
        let (tau, rho) = ((1.0 - cfg.rho_squared).sqrt(), cfg.rho_squared.sqrt());
        let (even, odd) = parity_decompose(&input, cfg.axis, Interpolation::BandLimited)?;
        let total = input.norm_sqr();
        let pair = beam_splitter_fock(&TwoModeState::fock_basis(1, 1, cfg.cutoff)?, tau, rho)?;
        let two = cfg
            .two_stage
            .as_ref()
            .map(|t| two_stage(t, &input, cfg.interstage_phase, ctx.base_dir, ctx.options.refine))
            .transpose()?;
        let summary = ParitySummary {
            tau,
            rho,
            interstage_phase: cfg.interstage_phase,
            even_weight: even.norm_sqr() / total,
            odd_weight: odd.norm_sqr() / total,
            red_prob: out.red_prob,
            blue_prob: out.blue_prob,
            hom_coincidence: hom_coincidence(tau, rho)?,
            two_stage: two,
        };
        let line = format!(
            "even={:.6} odd={:.6} blue_prob={:.6} red_prob={:.6} hom={:.3e}",
            summary.even_weight, summary.odd_weight, summary.blue_prob, summary.red_prob, summary.hom_coincidence
        );
        Ok(RunOutput {
            summary: to_json(&summary),
            line,
            artifacts: vec![
                ("input.csv".into(), envelope_bytes(&input)),
                ("red.csv".into(), envelope_bytes(&out.red_envelope)),
                ("blue.csv".into(), envelope_bytes(&out.blue_envelope)),
                ("pair_state.json".into(), pair.to_json()?.into_bytes()),
            ],
        })
    }
}

fn swept(base: &SimulationConfig, parameter: SweepParameter, value: f64, fixed_area: bool) -> Result<SimulationConfig> {
    let mut c = base.clone();
    match parameter {
        SweepParameter::Gamma => c.params.gamma = value,
        SweepParameter::SigmaS => c.params.sigma_s = value,
        SweepParameter::SigmaR => c.params.sigma_r = value,
        SweepParameter::PumpAmplitude | SweepParameter::PumpHalfDuration => match &mut c.pump.shape {
            PumpShapeConfig::Gaussian {
                amplitude,
                half_duration,
            } => {
                if parameter == SweepParameter::PumpAmplitude {
                    *amplitude = value;
                } else {
                    if fixed_area {
                        *amplitude *= *half_duration / value;
                    }
                    *half_duration = value;
                }
            }
            _ => return Err(Error::Schema("pump sweeps need a gaussian pump".into())),
        },
    }
    Ok(c)
}

pub fn sweep_rows(cfg: &SweepConfig, base_dir: &Path, refine: usize) -> Result<Vec<(f64, RunSummary)>> {
    cfg.values
        .par_iter()
        .map(|&v| {
            let sim = swept(&cfg.base, cfg.parameter, v, cfg.fixed_area)?;
            Ok((v, simulate_config(&sim, sim.engine, base_dir, refine)?.summary))
        })
        .collect()
}

pub struct SweepMode;

impl ModeRunner for SweepMode {
    fn mode(&self) -> Mode {
        Mode::Sweep
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let cfg = ctx
            .config
            .sweep
            .as_ref()
            .ok_or_else(|| Error::Schema("missing `sweep` section".into()))?;
        let rows = sweep_rows(cfg, ctx.base_dir, ctx.options.refine)?;
        let mut text = String::from(
            "value,efficiency,transmission,reversal_fidelity,mapped_fidelity,measured_M,flux_error,tau_analytic,rho_analytic\n",
        );
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for (v, s) in &rows {
            let _ = writeln!(
                text,
                "{v},{},{},{},{},{},{},{},{}",
                s.efficiency,
                s.transmission,
                opt(s.reversal_fidelity),
                opt(s.mapped_fidelity),
                opt(s.measured_m),
                s.flux_error,
                opt(s.coefficients.map(|c| c.tau_analytic)),
                opt(s.coefficients.map(|c| c.rho_analytic)),
            );
        }
        let line = format!("{} runs over {:?}", rows.len(), cfg.parameter);
        let summary: Vec<serde_json::Value> = rows
            .iter()
            .map(|(v, s)| serde_json::json!({ "value": v, "summary": to_json(s) }))
            .collect();
        Ok(RunOutput {
            summary: serde_json::Value::Array(summary),
            line,
            artifacts: vec![("sweep.csv".into(), text.into_bytes())],
        })
    }
}

/// Split-step against closed-form output for one pump scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleComparison {
    pub scale: f64,
    pub half_duration: f64,
    /// `sqrt(|Δs|² + |Δr|²) / |s_in|`.
    pub l2_error: f64,
    pub r_error: f64,
    /// Converted-band error after removing the measured delay.
    pub aligned_r_error: f64,
    pub lag: f64,
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidateSummary {
    pub comparisons: Vec<OracleComparison>,
    pub monotone: bool,
    pub flux_error: f64,
    pub convergence: Option<ConvergenceReport>,
}

pub fn oracle_comparisons(cfg: &ValidateConfig, base_dir: &Path, refine: usize) -> Result<Vec<OracleComparison>> {
    cfg.pump_scales
        .par_iter()
        .map(|&k| {
            let p0 = match cfg.base.pump.shape {
                PumpShapeConfig::Gaussian { half_duration, .. } => half_duration,
                _ => return Err(Error::Schema("validation needs a gaussian pump".into())),
            };
            let sim = swept(&cfg.base, SweepParameter::PumpHalfDuration, p0 * k, true)?;
            let a = simulate_config(&sim, EngineChoice::SplitStep, base_dir, refine)?;
            let b = simulate_config(&sim, EngineChoice::Analytic, base_dir, refine)?;
            let norm = a.scenario.s_in.norm();
            let ds = a.output.s_out.sub(&b.output.s_out)?.norm_sqr();
            let dr = a.output.r_out.sub(&b.output.r_out)?.norm_sqr();
            let (_, delay) = aligned_fidelity(&a.output.r_out, &b.output.r_out)?;
            let shifted = b.output.r_out.remap(
                AffineTimeMap::delay(-delay),
                Complex64::new(1.0, 0.0),
                Interpolation::BandLimited,
            )?;
            Ok(OracleComparison {
                scale: k,
                half_duration: p0 * k,
                l2_error: (ds + dr).sqrt() / norm,
                r_error: dr.sqrt() / norm,
                aligned_r_error: relative_l2(&a.output.r_out, &shifted, norm)?,
                lag: -delay,
                efficiency: a.metrics.efficiency,
            })
        })
        .collect()
}

pub struct ValidateMode;

impl ModeRunner for ValidateMode {
    fn mode(&self) -> Mode {
        Mode::Validate
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let cfg = ctx
            .config
            .validate
            .as_ref()
            .ok_or_else(|| Error::Schema("missing `validate` section".into()))?;
        let comparisons = oracle_comparisons(cfg, ctx.base_dir, ctx.options.refine)?;
        let monotone = comparisons.windows(2).all(|w| w[1].l2_error < w[0].l2_error);
        let base = simulate_config(&cfg.base, EngineChoice::SplitStep, ctx.base_dir, ctx.options.refine)?;
        let convergence = cfg
            .convergence
            .as_ref()
            .map(|c| {
                let mut sim = cfg.base.clone();
                sim.grid.samples = c.samples;
                sim.grid.z_steps = c.z_steps;
                convergence_study(&build_scenario(&sim, ctx.base_dir, 1)?, c.levels)
            })
            .transpose()?;
        let summary = ValidateSummary {
            comparisons,
            monotone,
            flux_error: base.metrics.flux_error,
            convergence,
        };
        let mut text = String::from("scale,half_duration,l2_error,r_error,aligned_r_error,lag,efficiency\n");
        for c in &summary.comparisons {
            let _ = writeln!(
                text,
                "{},{},{},{},{},{},{}",
                c.scale, c.half_duration, c.l2_error, c.r_error, c.aligned_r_error, c.lag, c.efficiency
            );
        }
        let errs: Vec<String> = summary.comparisons.iter().map(|c| format!("{:.4}", c.l2_error)).collect();
        let mut line = format!("oracle_l2=[{}] monotone={} flux_error={:.2e}", errs.join(", "), monotone, summary.flux_error);
        if let Some(order) = summary.convergence.as_ref().and_then(|c| c.observed_order()) {
            let _ = write!(line, " order={order:.3}");
        }
        Ok(RunOutput {
            summary: to_json(&summary),
            line,
            artifacts: vec![("validate.csv".into(), text.into_bytes())],
        })
    }
}
