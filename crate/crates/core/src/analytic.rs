//! Impulsive-pump limit of the coupled-mode equations.
//!
//! When the pump is short compared with every signal time scale, the
//! interaction acts as a beam splitter between a pulse and the reversed,
//! rescaled copy of its partner. Transmission and conversion amplitudes are
//! `tau = sech(g)` and `rho = tanh(g)` with `g = gamma * eps_p / sigma_bar`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::envelope::{AffineTimeMap, ComplexEnvelope, Interpolation, TimeGrid, SUPPORT_THRESHOLD};
use crate::error::{Error, Result};

/// Medium parameters of the local-time coupled-mode equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeWaveParams {
    /// Slowness offset of the signal relative to the pump.
    pub sigma_s: f64,
    /// Slowness offset of the converted band relative to the pump.
    pub sigma_r: f64,
    pub gamma: f64,
    pub length: f64,
}

impl ThreeWaveParams {
    pub fn new(sigma_s: f64, sigma_r: f64, gamma: f64, length: f64) -> Result<Self> {
        let p = Self {
            sigma_s,
            sigma_r,
            gamma,
            length,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::invalid(format!("medium length must be positive, got {}", self.length)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!("coupling must be non-negative, got {}", self.gamma)));
        }
        if !(self.sigma_s.is_finite() && self.sigma_r.is_finite()) {
            return Err(Error::invalid("slowness offsets must be finite"));
        }
        Ok(())
    }

    /// Opposite-sign offsets: the two bands sweep through the pump from
    /// opposite sides, which is what reverses the envelope.
    pub fn is_reversing(&self) -> bool {
        self.sigma_s * self.sigma_r < 0.0
    }

    /// Walk-off of each band relative to the pump over the medium.
    pub fn walk_offs(&self) -> (f64, f64) {
        (self.sigma_s.abs() * self.length, self.sigma_r.abs() * self.length)
    }
}

/// Pump amplitude profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PumpShape {
    /// `amplitude * exp(-t^2 / half_duration^2)`.
    Gaussian { amplitude: f64, half_duration: f64 },
    Rectangle { height: f64, width: f64 },
    /// Sampled (possibly complex) profile, linearly interpolated.
    Tabulated(ComplexEnvelope),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpPulse {
    pub shape: PumpShape,
    pub center: f64,
}

impl PumpPulse {
    pub fn gaussian(amplitude: f64, half_duration: f64) -> Self {
        Self {
            shape: PumpShape::Gaussian {
                amplitude,
                half_duration,
            },
            center: 0.0,
        }
    }

    pub fn rectangle(height: f64, width: f64) -> Self {
        Self {
            shape: PumpShape::Rectangle { height, width },
            center: 0.0,
        }
    }

    pub fn tabulated(profile: ComplexEnvelope) -> Self {
        Self {
            shape: PumpShape::Tabulated(profile),
            center: 0.0,
        }
    }

    pub fn centered_at(mut self, center: f64) -> Self {
        self.center = center;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() {
            return Err(Error::invalid("pump centre must be finite"));
        }
        match &self.shape {
            PumpShape::Gaussian {
                amplitude,
                half_duration,
            } => {
                if !(*half_duration > 0.0) || !amplitude.is_finite() {
                    return Err(Error::invalid("gaussian pump needs finite amplitude and positive duration"));
                }
            }
            PumpShape::Rectangle { height, width } => {
                if !(*width > 0.0) || !height.is_finite() {
                    return Err(Error::invalid("rectangular pump needs finite height and positive width"));
                }
            }
            PumpShape::Tabulated(_) => {}
        }
        Ok(())
    }

    pub fn value(&self, t: f64) -> Complex64 {
        let x = t - self.center;
        match &self.shape {
            PumpShape::Gaussian {
                amplitude,
                half_duration,
            } => Complex64::new(amplitude * (-(x / half_duration).powi(2)).exp(), 0.0),
            PumpShape::Rectangle { height, width } => {
                Complex64::new(if x.abs() <= width / 2.0 { *height } else { 0.0 }, 0.0)
            }
            PumpShape::Tabulated(table) => {
                let g = table.grid();
                let p = g.position(x);
                let n = g.len();
                if p < 0.0 || p > (n - 1) as f64 {
                    return Complex64::new(0.0, 0.0);
                }
                let i = (p.floor() as usize).min(n - 2);
                let f = p - i as f64;
                table.samples()[i] * (1.0 - f) + table.samples()[i + 1] * f
            }
        }
    }

    pub fn sample(&self, grid: &TimeGrid) -> ComplexEnvelope {
        ComplexEnvelope::from_fn(*grid, |t| self.value(t))
    }

    /// True when the profile has no imaginary part.
    pub fn is_real(&self) -> bool {
        match &self.shape {
            PumpShape::Tabulated(t) => t.samples().iter().all(|z| z.im == 0.0),
            _ => true,
        }
    }

    /// Spectral 1/e amplitude half-width.
    pub fn bandwidth(&self) -> f64 {
        match &self.shape {
            PumpShape::Gaussian { half_duration, .. } => 2.0 / half_duration,
            // first spectral null of the sinc at 2π/w; the RMS width diverges
            PumpShape::Rectangle { width, .. } => 2.0 * PI / width,
            PumpShape::Tabulated(t) => t.spectral_half_width(),
        }
    }

    /// Shortest time scale of the profile: the 1/e half-duration of a
    /// Gaussian, the half-width of a rectangle.
    pub fn characteristic_time(&self) -> f64 {
        match &self.shape {
            PumpShape::Gaussian { half_duration, .. } => *half_duration,
            PumpShape::Rectangle { width, .. } => width / 2.0,
            PumpShape::Tabulated(t) => t.duration() / 2.0,
        }
    }

    /// Time span `[lo, hi]` outside which the pump is negligible.
    pub fn support(&self) -> (f64, f64) {
        let half = match &self.shape {
            // exp(-x^2) < 1e-16 beyond x = 6.1
            PumpShape::Gaussian { half_duration, .. } => 6.1 * half_duration,
            PumpShape::Rectangle { width, .. } => width / 2.0,
            PumpShape::Tabulated(t) => {
                let (lo, hi) = t.support(SUPPORT_THRESHOLD).unwrap_or((0.0, 0.0));
                return (self.center + lo, self.center + hi);
            }
        };
        (self.center - half, self.center + half)
    }
}

fn cumulative_tabulated(table: &ComplexEnvelope, x: f64) -> Complex64 {
    // trapezoid rule over the linear interpolant, exact for it
    let g = table.grid();
    let s = table.samples();
    let p = g.position(x).clamp(0.0, (g.len() - 1) as f64);
    let full = p.floor() as usize;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..full.min(g.len() - 1) {
        acc += (s[k] + s[k + 1]) * 0.5;
    }
    if full < g.len() - 1 {
        let f = p - full as f64;
        let end = s[full] * (1.0 - f) + s[full + 1] * f;
        acc += (s[full] + end) * 0.5 * f;
    }
    acc * g.dt()
}

fn ensure_decaying_tails(table: &ComplexEnvelope) -> Result<()> {
    let edge = table.edge_ratio(1);
    if edge > SUPPORT_THRESHOLD {
        return Err(Error::invalid(format!(
            "tabulated pump does not decay at the table edges (edge/peak = {edge:.3e})"
        )));
    }
    Ok(())
}

/// Complex running area `∫_{-inf}^{t} A_p`. Used where a complex pump is
/// allowed (the solver); the closed-form coefficients use [`pump_area`].
pub fn pump_area_complex(p: &PumpPulse, t: f64) -> Result<Complex64> {
    p.validate()?;
    let x = t - p.center;
    Ok(match &p.shape {
        PumpShape::Gaussian {
            amplitude,
            half_duration,
        } => Complex64::new(
            amplitude * half_duration * PI.sqrt() / 2.0 * (1.0 + erf(x / half_duration)),
            0.0,
        ),
        PumpShape::Rectangle { height, width } => {
            Complex64::new(height * (x + width / 2.0).clamp(0.0, *width), 0.0)
        }
        PumpShape::Tabulated(table) => {
            ensure_decaying_tails(table)?;
            cumulative_tabulated(table, x)
        }
    })
}

/// Running pump area `eps(t)`; `t = +inf` gives the full area `eps_p`.
///
/// Complex profiles are rejected: the beam-splitter coefficients assume a
/// real pump.
pub fn pump_area(p: &PumpPulse, t: f64) -> Result<f64> {
    if !p.is_real() {
        return Err(Error::Unsupported(
            "closed-form coefficients need a real pump; use the numerical solver".into(),
        ));
    }
    Ok(pump_area_complex(p, t)?.re)
}

pub fn total_pump_area(p: &PumpPulse) -> Result<f64> {
    pump_area(p, f64::INFINITY)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConversionCoeffs {
    pub tau: f64,
    pub rho: f64,
    pub sigma_bar: f64,
    /// Spectral magnification `sigma_s / sigma_r`.
    pub m: f64,
    /// Temporal magnification `|sigma_r / sigma_s|`.
    #[serde(rename = "M")]
    pub magnification: f64,
    pub t_s: f64,
    pub t_r: f64,
    pub pump_area: f64,
    pub params: ThreeWaveParams,
}

impl ConversionCoeffs {
    pub fn efficiency(&self) -> f64 {
        self.rho * self.rho
    }
}

pub fn conversion_coeffs(params: &ThreeWaveParams, eps_p: f64) -> Result<ConversionCoeffs> {
    params.validate()?;
    if params.sigma_s == 0.0 || params.sigma_r == 0.0 {
        return Err(Error::invalid(
            "zero slowness offset: the band never walks through the pump",
        ));
    }
    if !eps_p.is_finite() {
        return Err(Error::invalid("pump area must be finite"));
    }
    let sigma_bar = (params.sigma_s * params.sigma_r).abs().sqrt();
    let g = params.gamma * eps_p / sigma_bar;
    let (t_s, t_r) = params.walk_offs();
    Ok(ConversionCoeffs {
        tau: 1.0 / g.cosh(),
        rho: g.tanh(),
        sigma_bar,
        m: params.sigma_s / params.sigma_r,
        magnification: (params.sigma_r / params.sigma_s).abs(),
        t_s,
        t_r,
        pump_area: eps_p,
        params: *params,
    })
}

/// Input-to-output map `(s(0,.), r(0,.)) -> (s(L,.), r(L,.))` in the impulsive
/// pump limit, with the collision at local time `axis`.
///
/// Transmitted parts are delayed by `sigma L`; converted parts are reversed
/// about the collision, stretched by `M` (or `1/M`) and carry `i rho` times
/// the amplitude factor that keeps photon number fixed. The map is symmetric
/// under relabelling the two bands, so a fast signal needs no special case.
pub fn apply_io_map(
    s_in: &ComplexEnvelope,
    r_in: &ComplexEnvelope,
    c: &ConversionCoeffs,
    axis: f64,
    interp: Interpolation,
) -> Result<(ComplexEnvelope, ComplexEnvelope)> {
    s_in.grid().ensure_matches(r_in.grid())?;
    let p = &c.params;
    if !p.is_reversing() {
        return Err(Error::Unsupported(
            "closed-form map needs slowness offsets of opposite sign".into(),
        ));
    }
    let s_out = output_band(s_in, r_in, p.sigma_s, p.sigma_r, c, axis, interp)?;
    let r_out = output_band(r_in, s_in, p.sigma_r, p.sigma_s, c, axis, interp)?;
    Ok((s_out, r_out))
}

/// Output of band `eta` fed by its own input and by the partner band `mu`.
fn output_band(
    own: &ComplexEnvelope,
    partner: &ComplexEnvelope,
    sigma_eta: f64,
    sigma_mu: f64,
    c: &ConversionCoeffs,
    axis: f64,
    interp: Interpolation,
) -> Result<ComplexEnvelope> {
    let l = c.params.length;
    let transmitted = own.remap(
        AffineTimeMap::delay(sigma_eta * l),
        Complex64::new(c.tau, 0.0),
        interp,
    )?;
    if c.rho == 0.0 {
        return Ok(transmitted);
    }
    let converted = converted_image(partner, sigma_eta, sigma_mu, l, axis, interp)?;
    transmitted.combine(Complex64::new(1.0, 0.0), &converted, Complex64::new(c.rho, 0.0))
}

/// Field that complete conversion (`rho = 1`) of `input`, travelling with
/// slowness `sigma_mu`, produces in the band with slowness `sigma_eta`.
///
/// `out(t) = i sqrt|σ_μ/σ_η| input(u)` with
/// `u = axis - σ_μ L + (σ_μ/σ_η)(t - axis)`.
pub fn converted_image(
    input: &ComplexEnvelope,
    sigma_eta: f64,
    sigma_mu: f64,
    length: f64,
    axis: f64,
    interp: Interpolation,
) -> Result<ComplexEnvelope> {
    if sigma_eta * sigma_mu >= 0.0 {
        return Err(Error::Unsupported(
            "closed-form map needs slowness offsets of opposite sign".into(),
        ));
    }
    let scale = sigma_mu / sigma_eta;
    let map = AffineTimeMap {
        scale,
        offset: axis - sigma_mu * length - scale * axis,
    };
    input.remap(map, Complex64::new(0.0, scale.abs().sqrt()), interp)
}

/// Where the converted copy of a pulse centred at `t_in` in band `mu`
/// emerges in band `eta`.
pub fn converted_center(t_in: f64, sigma_eta: f64, sigma_mu: f64, length: f64, axis: f64) -> f64 {
    axis + sigma_eta / sigma_mu * (t_in - axis + sigma_mu * length)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bandwidths {
    pub pump: f64,
    pub signal: f64,
    pub converted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub description: String,
    /// Left side over right side of the `>>` comparison; `None` for
    /// qualitative checks.
    pub ratio: Option<f64>,
    pub threshold: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const DEFAULT_CONDITION_FACTOR: f64 = 10.0;

fn ratio_check(name: &str, description: &str, ratio: f64, factor: f64) -> ConditionCheck {
    ConditionCheck {
        name: name.into(),
        description: description.into(),
        ratio: Some(ratio),
        threshold: Some(factor),
        pass: ratio >= factor,
    }
}

/// Medium-length checks: each band's spectrum must be wider than the
/// phase-matching resolution `2π/(|σ| L)` it sees.
pub(crate) fn resolution_checks(
    params: &ThreeWaveParams,
    bw: &Bandwidths,
    beta_p_prime: f64,
    factor: f64,
) -> Vec<ConditionCheck> {
    let l = params.length;
    let res = |sigma: f64| 2.0 * PI / (sigma.abs() * l);
    vec![
        ratio_check(
            "pump_long_medium",
            "B_p over 2π/(β'_p L)",
            bw.pump / res(beta_p_prime),
            factor,
        ),
        ratio_check(
            "signal_long_medium",
            "B_s over 2π/(|σ_s| L)",
            bw.signal / res(params.sigma_s),
            factor,
        ),
        ratio_check(
            "converted_long_medium",
            "B_r over 2π/(|σ_r| L)",
            bw.converted / res(params.sigma_r),
            factor,
        ),
    ]
}

/// Evaluates the sufficient conditions for envelope reversal. Ratios are
/// thresholded at `factor`.
pub fn check_reversal_conditions(
    params: &ThreeWaveParams,
    bw: &Bandwidths,
    beta_p_prime: f64,
    factor: f64,
) -> ConditionReport {
    let mut checks = vec![
        ratio_check("pump_broad_vs_signal", "B_p over B_s", bw.pump / bw.signal, factor),
        ratio_check(
            "pump_broad_vs_converted",
            "B_p over B_r",
            bw.pump / bw.converted,
            factor,
        ),
    ];
    checks.extend(resolution_checks(params, bw, beta_p_prime, factor));
    checks.push(ConditionCheck {
        name: "slowness_ordering".into(),
        description: "σ_s and σ_r of opposite sign (pump group velocity in between)".into(),
        ratio: None,
        threshold: None,
        pass: params.is_reversing(),
    });
    checks.push(ConditionCheck {
        name: "dispersion_neglected".into(),
        description: "no intra-band dispersion; holds by construction of the model".into(),
        ratio: None,
        threshold: None,
        pass: true,
    });
    ConditionReport { checks }
}
