//! Closed-form pulse shapes for signals and pumps.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::envelope::{io::load_envelope_csv, ComplexEnvelope, TimeGrid};
use crate::error::{Error, Result};

/// `exp(-t^2 / w^2)`.
pub fn gaussian(half_width: f64, t: f64) -> f64 {
    (-(t / half_width).powi(2)).exp()
}

/// Unit-norm Hermite-Gauss function of the given order whose order-0 member
/// is `exp(-t^2/w^2)` up to normalization.
pub fn hermite_gauss(order: usize, half_width: f64, t: f64) -> f64 {
    let x = std::f64::consts::SQRT_2 * t / half_width;
    let (mut h_prev, mut h) = (0.0, 1.0);
    for n in 0..order {
        let next = 2.0 * x * h - 2.0 * n as f64 * h_prev;
        h_prev = h;
        h = next;
    }
    let mut norm = std::f64::consts::PI.sqrt() * half_width / std::f64::consts::SQRT_2;
    for n in 1..=order {
        norm *= 2.0 * n as f64;
    }
    h * gaussian(half_width, t) / norm.sqrt()
}

/// Envelope shape, positioned relative to a pulse centre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PulseShape {
    Gaussian {
        half_width: f64,
    },
    HermiteGauss {
        order: usize,
        half_width: f64,
    },
    /// `(t - zero_offset) exp(-t^2/w^2)`: asymmetric, changes sign at `zero_offset`.
    SignChanging {
        half_width: f64,
        zero_offset: f64,
    },
    /// `exp(-t/T)` switched on at the centre by a logistic step of the given
    /// rise time (default `T/20`).
    DecayingExponential {
        decay_time: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rise_time: Option<f64>,
    },
    Rectangle {
        width: f64,
    },
    /// Envelope CSV; resampled linearly onto the target grid and shifted by the centre.
    Table {
        path: PathBuf,
    },
}

impl PulseShape {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            PulseShape::Gaussian { half_width }
            | PulseShape::HermiteGauss { half_width, .. }
            | PulseShape::SignChanging { half_width, .. } => positive("half_width", *half_width),
            PulseShape::DecayingExponential { decay_time, rise_time } => {
                positive("decay_time", *decay_time)?;
                rise_time.map_or(Ok(()), |r| positive("rise_time", r))
            }
            PulseShape::Rectangle { width } => positive("width", *width),
            PulseShape::Table { .. } => Ok(()),
        }
    }

    /// Real shape value at time `t` relative to the centre. `None` for tables.
    pub fn value(&self, t: f64) -> Option<f64> {
        Some(match *self {
            PulseShape::Gaussian { half_width } => gaussian(half_width, t),
            PulseShape::HermiteGauss { order, half_width } => hermite_gauss(order, half_width, t),
            PulseShape::SignChanging {
                half_width,
                zero_offset,
            } => (t - zero_offset) * gaussian(half_width, t),
            PulseShape::DecayingExponential {
                decay_time,
                rise_time,
            } => {
                let rise = rise_time.unwrap_or(decay_time / 20.0);
                let x = -t / rise;
                // logistic turn-on times the decay, written to avoid overflow
                if x > 0.0 {
                    (-t / decay_time - x).exp() / (1.0 + (-x).exp())
                } else {
                    (-t / decay_time).exp() / (1.0 + x.exp())
                }
            }
            PulseShape::Rectangle { width } => {
                if t.abs() <= width / 2.0 {
                    1.0
                } else {
                    0.0
                }
            }
            PulseShape::Table { .. } => return None,
        })
    }

    /// Samples the shape centred at `center`; table paths resolve against `base_dir`.
    pub fn sample(&self, grid: &TimeGrid, center: f64, base_dir: &Path) -> Result<ComplexEnvelope> {
        self.validate()?;
        if let PulseShape::Table { path } = self {
            let full = if path.is_absolute() {
                path.clone()
            } else {
                base_dir.join(path)
            };
            let table = load_envelope_csv(&full)?;
            return Ok(resample_linear(&table, grid, center));
        }
        Ok(ComplexEnvelope::from_fn(*grid, |t| {
            Complex64::new(self.value(t - center).unwrap_or(0.0), 0.0)
        }))
    }
}

pub(crate) fn resample_linear(table: &ComplexEnvelope, grid: &TimeGrid, shift: f64) -> ComplexEnvelope {
    let src = table.grid();
    let n = src.len();
    ComplexEnvelope::from_fn(*grid, |t| {
        let p = src.position(t - shift);
        if p < 0.0 || p > (n - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = (p.floor() as usize).min(n - 2);
        let f = p - i as f64;
        table.samples()[i] * (1.0 - f) + table.samples()[i + 1] * f
    })
}

/// Signal pulse description: shape, placement, optional quadratic phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub shape: PulseShape,
    /// Centre time; `None` selects the default collision placement.
    #[serde(default)]
    pub center: Option<f64>,
    /// Phase `chirp * (t - center)^2` in radians.
    #[serde(default)]
    pub chirp: f64,
    /// Squared norm (photon number) after scaling; `None` keeps the raw shape.
    #[serde(default = "default_photons")]
    pub photons: Option<f64>,
}

fn default_photons() -> Option<f64> {
    Some(1.0)
}

impl PulseSpec {
    pub fn new(shape: PulseShape) -> Self {
        Self {
            shape,
            center: None,
            chirp: 0.0,
            photons: Some(1.0),
        }
    }

    pub fn centered_at(mut self, center: f64) -> Self {
        self.center = Some(center);
        self
    }

    pub fn with_chirp(mut self, chirp: f64) -> Self {
        self.chirp = chirp;
        self
    }

    pub fn sample(&self, grid: &TimeGrid, default_center: f64, base_dir: &Path) -> Result<ComplexEnvelope> {
        let center = self.center.unwrap_or(default_center);
        let raw = self.shape.sample(grid, center, base_dir)?;
        let chirped = if self.chirp != 0.0 {
            let samples = grid
                .times()
                .zip(raw.samples())
                .map(|(t, z)| z * Complex64::from_polar(1.0, self.chirp * (t - center).powi(2)))
                .collect();
            ComplexEnvelope::new(*grid, samples)?
        } else {
            raw
        };
        match self.photons {
            Some(p) if p < 0.0 => Err(Error::invalid("photon number must be non-negative")),
            Some(p) => {
                let n = chirped.norm();
                if n == 0.0 {
                    return Err(Error::invalid("pulse shape vanishes on the grid"));
                }
                Ok(chirped.scaled(Complex64::new(p.sqrt() / n, 0.0)))
            }
            None => Ok(chirped),
        }
    }
}
