//! Sampled complex envelopes on a uniform local-time grid.
//!
//! Envelopes carry amplitudes in units of square-root photon flux, so
//! `norm_sqr` is a photon number. Durations reported anywhere in this crate
//! use the 1/e amplitude half-width convention: a Gaussian `exp(-t^2/w^2)`
//! has duration `w` and spectral half-width `2/w`.
//!
//! Only the slowly varying envelope is modelled. Envelope reversal
//! `f(t) -> f(2a - t)` is linear and does not conjugate; the antilinear
//! full time reversal has no device counterpart and is not offered.

mod grid;
pub mod io;
mod resample;
mod spectral;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use grid::TimeGrid;
pub use resample::{AffineTimeMap, Interpolation};
pub use spectral::{
    inverse_spectral_transform, refine_bandlimited, spectral_transform, SpectralAmplitude,
    SpectralEvaluator,
};

use crate::error::{Error, Result};

/// Relative amplitude below which a pulse counts as absent (support, edge checks).
pub const SUPPORT_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexEnvelope {
    grid: TimeGrid,
    samples: Vec<Complex64>,
}

impl ComplexEnvelope {
    pub fn new(grid: TimeGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {}",
                samples.len(),
                grid.len()
            )));
        }
        if let Some(k) = samples.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {k}")));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let samples = grid.times().map(f).collect();
        Self { grid, samples }
    }

    /// Internal constructor for samples already known to be finite.
    pub(crate) fn from_parts(grid: TimeGrid, samples: Vec<Complex64>) -> Self {
        debug_assert_eq!(grid.len(), samples.len());
        Self { grid, samples }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// `∫|e|^2 dt` by rectangle quadrature (exact trapezoid on a periodic grid).
    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dt()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self::from_parts(self.grid, self.samples.iter().map(|z| z * c).collect())
    }

    /// Unit-norm copy; a zero envelope is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scaled(Complex64::new(1.0 / n, 0.0))
        }
    }

    /// `a * self + b * other` on a shared grid.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        self.grid.ensure_matches(&other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Self::from_parts(self.grid, samples))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// Interval between the first and last samples whose magnitude exceeds
    /// `threshold * peak`. `None` for a zero envelope.
    pub fn support(&self, threshold: f64) -> Option<(f64, f64)> {
        let cut = threshold * self.peak();
        if cut == 0.0 && self.is_zero() {
            return None;
        }
        let first = self.samples.iter().position(|z| z.norm() > cut)?;
        let last = self.samples.iter().rposition(|z| z.norm() > cut)?;
        Some((self.grid.time(first), self.grid.time(last)))
    }

    /// Largest magnitude among the `width` samples at either grid edge,
    /// relative to the peak.
    pub fn edge_ratio(&self, width: usize) -> f64 {
        let peak = self.peak();
        if peak == 0.0 {
            return 0.0;
        }
        let w = width.min(self.samples.len() / 2).max(1);
        let n = self.samples.len();
        self.samples[..w]
            .iter()
            .chain(&self.samples[n - w..])
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            / peak
    }

    /// Intensity-weighted mean time.
    pub fn centroid(&self) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (t, z) in self.grid.times().zip(&self.samples) {
            num += t * z.norm_sqr();
            den += z.norm_sqr();
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    /// RMS width of `|e|^2`.
    pub fn rms_width(&self) -> f64 {
        let c = self.centroid();
        let (mut num, mut den) = (0.0, 0.0);
        for (t, z) in self.grid.times().zip(&self.samples) {
            num += (t - c).powi(2) * z.norm_sqr();
            den += z.norm_sqr();
        }
        if den == 0.0 {
            0.0
        } else {
            (num / den).sqrt()
        }
    }

    /// Duration in the 1/e amplitude half-width convention: `2 * rms_width`,
    /// exact for Gaussians.
    pub fn duration(&self) -> f64 {
        2.0 * self.rms_width()
    }

    /// Spectral width in the 1/e amplitude half-width convention:
    /// `2 * rms` of `|S(nu)|^2`, exact (`2/w`) for Gaussians.
    pub fn spectral_half_width(&self) -> f64 {
        let s = spectral_transform(self);
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (nu, z) in s.frequencies().zip(s.samples()) {
            let p = z.norm_sqr();
            m0 += p;
            m1 += nu * p;
            m2 += nu * nu * p;
        }
        if m0 == 0.0 {
            return 0.0;
        }
        let mean = m1 / m0;
        2.0 * (m2 / m0 - mean * mean).max(0.0).sqrt()
    }

    /// Applies `output(t) = amplitude * input(map(t))`.
    pub fn remap(
        &self,
        map: AffineTimeMap,
        amplitude: Complex64,
        interp: Interpolation,
    ) -> Result<Self> {
        resample::remap(self, map, amplitude, interp)
    }
}

/// `output(t) = input(2 * axis - t)`.
///
/// Exact index reversal when `axis` sits on a grid point or half-point;
/// otherwise the envelope is resampled with `interp`.
pub fn envelope_reverse(
    e: &ComplexEnvelope,
    axis: f64,
    interp: Interpolation,
) -> Result<ComplexEnvelope> {
    if !e.grid().contains(axis) {
        return Err(Error::invalid(format!(
            "reversal axis {axis} lies outside the grid [{}, {}]",
            e.grid().t_start(),
            e.grid().t_last()
        )));
    }
    e.remap(AffineTimeMap::reversal(axis), Complex64::new(1.0, 0.0), interp)
}

/// `output(t) = M^{-1/2} input(axis + (t - axis)/M)`; stretches by `M`
/// and preserves the squared norm.
pub fn rescale_time(
    e: &ComplexEnvelope,
    magnification: f64,
    axis: f64,
    interp: Interpolation,
) -> Result<ComplexEnvelope> {
    if !(magnification > 0.0) || !magnification.is_finite() {
        return Err(Error::invalid(format!(
            "magnification must be positive, got {magnification}"
        )));
    }
    e.remap(
        AffineTimeMap::rescale(magnification, axis),
        Complex64::new(magnification.powf(-0.5), 0.0),
        interp,
    )
}

/// `∫ a*(t) b(t) dt`.
pub fn overlap(a: &ComplexEnvelope, b: &ComplexEnvelope) -> Result<Complex64> {
    a.grid().ensure_matches(b.grid())?;
    let sum: Complex64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(sum * a.grid().dt())
}

/// `|<a, b>|^2 / (|a|^2 |b|^2)`; zero if either envelope vanishes.
pub fn fidelity(a: &ComplexEnvelope, b: &ComplexEnvelope) -> Result<f64> {
    let ov = overlap(a, b)?;
    let den = a.norm_sqr() * b.norm_sqr();
    Ok(if den == 0.0 { 0.0 } else { ov.norm_sqr() / den })
}

/// Fidelity maximised over a relative time shift: returns `(F, delay)`
/// with `a(t) ≈ c * b(t + delay)` at the optimum. Shifts are applied as
/// exact spectral phases, so the delay need not be a whole sample.
pub fn aligned_fidelity(a: &ComplexEnvelope, b: &ComplexEnvelope) -> Result<(f64, f64)> {
    a.grid().ensure_matches(b.grid())?;
    let den = a.norm_sqr() * b.norm_sqr();
    if den == 0.0 {
        return Ok((0.0, 0.0));
    }
    let grid = a.grid();
    let n = grid.len();
    let mut planner = rustfft::FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let (mut fa, mut fb) = (a.samples().to_vec(), b.samples().to_vec());
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    let cross: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x.conj() * y).collect();
    let mut corr = cross.clone();
    planner.plan_fft_inverse(n).process(&mut corr);
    let best = corr
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm_sqr().total_cmp(&y.1.norm_sqr()))
        .map(|(m, _)| m)
        .unwrap_or(0);
    let freqs = grid.bin_frequencies();
    let scale = grid.dt() / n as f64;
    let value = |delay: f64| {
        let c: Complex64 = cross
            .iter()
            .zip(&freqs)
            .map(|(x, w)| x * Complex64::from_polar(1.0, w * delay))
            .sum();
        (c * scale).norm_sqr()
    };
    // golden-section search within one sample of the discrete optimum
    let coarse = grid.bin_frequency(best) / grid.frequency_step() * grid.dt();
    let (mut lo, mut hi) = (coarse - grid.dt(), coarse + grid.dt());
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (value(x1), value(x2));
    for _ in 0..60 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = value(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = value(x1);
        }
    }
    let delay = 0.5 * (lo + hi);
    Ok(((value(delay) / den).min(1.0), delay))
}

/// Relative L2 distance `|a - b| / |reference|`.
pub fn relative_l2(a: &ComplexEnvelope, b: &ComplexEnvelope, reference: f64) -> Result<f64> {
    let d = a.sub(b)?;
    Ok(d.norm() / reference)
}

/// Splits `e` into parts that are even and odd under reversal about `axis`.
pub fn parity_decompose(
    e: &ComplexEnvelope,
    axis: f64,
    interp: Interpolation,
) -> Result<(ComplexEnvelope, ComplexEnvelope)> {
    let rev = envelope_reverse(e, axis, interp)?;
    let half = Complex64::new(0.5, 0.0);
    let even = e.combine(half, &rev, half)?;
    let odd = e.combine(half, &rev, -half)?;
    Ok((even, odd))
}
