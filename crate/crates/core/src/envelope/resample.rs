use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{ComplexEnvelope, SUPPORT_THRESHOLD};
use crate::error::{Error, Result};

/// How off-grid values are reconstructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Trigonometric (periodic band-limited) interpolation.
    #[default]
    BandLimited,
    Linear,
}

/// `t_source = scale * t + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTimeMap {
    pub scale: f64,
    pub offset: f64,
}

impl AffineTimeMap {
    pub fn identity() -> Self {
        Self { scale: 1.0, offset: 0.0 }
    }

    /// `t -> t - delay`.
    pub fn delay(delay: f64) -> Self {
        Self { scale: 1.0, offset: -delay }
    }

    /// `t -> 2 axis - t`.
    pub fn reversal(axis: f64) -> Self {
        Self { scale: -1.0, offset: 2.0 * axis }
    }

    /// `t -> axis + (t - axis) / m`.
    pub fn rescale(m: f64, axis: f64) -> Self {
        Self {
            scale: 1.0 / m,
            offset: axis * (1.0 - 1.0 / m),
        }
    }

    pub fn source(&self, t: f64) -> f64 {
        self.scale * t + self.offset
    }

    /// Output time whose source is `t_source`.
    pub fn image(&self, t_source: f64) -> f64 {
        (t_source - self.offset) / self.scale
    }
}

pub(super) fn remap(
    e: &ComplexEnvelope,
    map: AffineTimeMap,
    amplitude: Complex64,
    interp: Interpolation,
) -> Result<ComplexEnvelope> {
    if !(map.scale.is_finite() && map.offset.is_finite()) || map.scale == 0.0 {
        return Err(Error::invalid(format!("degenerate time map {map:?}")));
    }
    let grid = *e.grid();
    let Some((lo, hi)) = e.support(SUPPORT_THRESHOLD) else {
        return Ok(ComplexEnvelope::zeros(grid));
    };
    let (a, b) = (map.image(lo), map.image(hi));
    let (needed_lo, needed_hi) = (a.min(b), a.max(b));
    let slack = 1e-9 * grid.dt();
    if needed_lo < grid.t_start() - slack || needed_hi > grid.t_last() + slack {
        return Err(Error::GridOverflow {
            what: "mapped pulse support".into(),
            needed_lo,
            needed_hi,
            grid_lo: grid.t_start(),
            grid_hi: grid.t_last(),
        });
    }

    let n = grid.len();
    // Unit-scale maps that land on grid points are index permutations of
    // the periodic window, which makes them exactly invertible.
    if map.scale.abs() == 1.0 {
        let shift = (map.scale * grid.t_start() + map.offset - grid.t_start()) / grid.dt();
        if (shift - shift.round()).abs() < 1e-9 {
            let shift = shift.round() as i64;
            let src = e.samples();
            let samples = (0..n as i64)
                .map(|k| src[(map.scale as i64 * k + shift).rem_euclid(n as i64) as usize] * amplitude)
                .collect();
            return Ok(ComplexEnvelope::from_parts(grid, samples));
        }
    }

    let samples: Vec<Complex64> = match interp {
        Interpolation::Linear => {
            let src = e.samples();
            (0..n)
                .map(|k| {
                    let p = grid.position(map.source(grid.time(k)));
                    if p < 0.0 || p > (n - 1) as f64 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let i = (p.floor() as usize).min(n - 2);
                    let f = p - i as f64;
                    (src[i] * (1.0 - f) + src[i + 1] * f) * amplitude
                })
                .collect()
        }
        Interpolation::BandLimited => {
            let interp = TrigInterpolant::new(e);
            // Sources outside the window would pick up periodic images.
            let (w_lo, w_hi) = (grid.t_start(), grid.t_start() + grid.span());
            (0..n)
                .into_par_iter()
                .map(|k| {
                    let ts = map.source(grid.time(k));
                    if ts < w_lo || ts >= w_hi {
                        Complex64::new(0.0, 0.0)
                    } else {
                        interp.eval(ts) * amplitude
                    }
                })
                .collect()
        }
    };
    Ok(ComplexEnvelope::from_parts(grid, samples))
}

/// Periodic trigonometric interpolant through the samples of an envelope.
pub(crate) struct TrigInterpolant {
    t_start: f64,
    dw: f64,
    /// FFT coefficients divided by n, in signed order `-n/2 .. n/2`.
    coeffs: Vec<Complex64>,
    lowest: i64,
    nyquist: Option<Complex64>,
}

impl TrigInterpolant {
    pub(crate) fn new(e: &ComplexEnvelope) -> Self {
        let grid = e.grid();
        let n = grid.len();
        let mut buf = e.samples().to_vec();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        let half = (n / 2) as i64;
        let even = n.is_multiple_of(2);
        // bins -(n-1)/2 .. (n-1)/2, Nyquist handled separately for even n
        let lowest = if even { -half + 1 } else { -half };
        let highest = half - if even { 1 } else { 0 };
        let coeffs = (lowest..=highest)
            .map(|m| buf[m.rem_euclid(n as i64) as usize] * scale)
            .collect();
        let nyquist = even.then(|| buf[n / 2] * scale);
        Self {
            t_start: grid.t_start(),
            dw: 2.0 * PI / grid.span(),
            coeffs,
            lowest,
            nyquist,
        }
    }

    pub(crate) fn eval(&self, t: f64) -> Complex64 {
        let x = t - self.t_start;
        let step = Complex64::from_polar(1.0, self.dw * x);
        let mut phase = Complex64::from_polar(1.0, self.dw * x * self.lowest as f64);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            acc += c * phase;
            // re-anchor periodically to bound rounding drift of the recurrence
            if i % 256 == 255 {
                phase = Complex64::from_polar(1.0, self.dw * x * (self.lowest + i as i64 + 1) as f64);
            } else {
                phase *= step;
            }
        }
        if let Some(ny) = self.nyquist {
            // even n: coefficients cover |m| < n/2, the Nyquist term is cos(n/2 dw x)
            let half = (self.coeffs.len() + 1) as f64 / 2.0;
            acc += ny * (self.dw * x * half).cos();
        }
        acc
    }
}
