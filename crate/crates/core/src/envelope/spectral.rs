use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{ComplexEnvelope, TimeGrid};
use crate::error::{Error, Result};

/// Spectral amplitude `S(nu) = ∫ dt e^{+i nu t} e(t)` sampled on a centred
/// baseband grid `nu_j = nu_start + j * dnu`.
///
/// The envelope is recovered as `e(t) = (1/2π) ∫ dnu e^{-i nu t} S(nu)`, so
/// `Σ |S_j|^2 dnu / 2π` equals `∫ |e|^2 dt`. `t_origin` and `dt` record
/// the time grid the samples came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralAmplitude {
    nu_start: f64,
    dnu: f64,
    t_origin: f64,
    samples: Vec<Complex64>,
}

impl SpectralAmplitude {
    pub fn new(nu_start: f64, dnu: f64, t_origin: f64, samples: Vec<Complex64>) -> Result<Self> {
        if !(dnu > 0.0) || samples.len() < 2 {
            return Err(Error::invalid("spectral grid needs dnu > 0 and at least 2 samples"));
        }
        Ok(Self {
            nu_start,
            dnu,
            t_origin,
            samples,
        })
    }

    /// Samples a closed-form spectrum on the centred grid dual to `grid`.
    pub fn from_fn(grid: &TimeGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let n = grid.len();
        let dnu = grid.frequency_step();
        let nu_start = -((n / 2) as f64) * dnu;
        let samples = (0..n).map(|j| f(nu_start + j as f64 * dnu)).collect();
        Self {
            nu_start,
            dnu,
            t_origin: grid.t_start(),
            samples,
        }
    }

    pub fn nu_start(&self) -> f64 {
        self.nu_start
    }

    pub fn dnu(&self) -> f64 {
        self.dnu
    }

    pub fn t_origin(&self) -> f64 {
        self.t_origin
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn frequency(&self, j: usize) -> f64 {
        self.nu_start + j as f64 * self.dnu
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |j| self.frequency(j))
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn nu_last(&self) -> f64 {
        self.frequency(self.len() - 1)
    }

    /// The time grid these samples are dual to.
    pub fn time_grid(&self) -> Result<TimeGrid> {
        let n = self.len();
        TimeGrid::new(self.t_origin, 2.0 * std::f64::consts::PI / (n as f64 * self.dnu), n)
    }

    /// `Σ |S|^2 dnu / 2π`.
    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dnu
            / (2.0 * std::f64::consts::PI)
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        let mut out = self.clone();
        if n > 0.0 {
            out.samples.iter_mut().for_each(|z| *z /= n);
        }
        out
    }

    pub fn with_samples(&self, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != self.len() {
            return Err(Error::GridMismatch(format!(
                "{} spectral samples for a grid of {}",
                samples.len(),
                self.len()
            )));
        }
        Ok(Self {
            samples,
            ..self.clone()
        })
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.len() == other.len()
            && (self.dnu - other.dnu).abs() <= 1e-12 * self.dnu
            && (self.nu_start - other.nu_start).abs() <= 1e-12 * self.dnu * self.len() as f64
    }

    /// `Σ a*(nu) b(nu) dnu / 2π`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch("spectral grids differ".into()));
        }
        let s: Complex64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.dnu / (2.0 * std::f64::consts::PI))
    }

    /// Evaluator for the continuous spectrum at arbitrary frequencies.
    pub fn evaluator(&self) -> Result<SpectralEvaluator> {
        Ok(SpectralEvaluator {
            envelope: inverse_spectral_transform(self)?,
        })
    }
}

/// Continuous-frequency evaluation of a sampled spectrum.
///
/// The spectrum of a time-limited sampled envelope is its discrete-time
/// Fourier transform `dt Σ_k e_k e^{i nu t_k}`, which interpolates the
/// spectral samples exactly and is band-limited in the dual sense.
pub struct SpectralEvaluator {
    envelope: ComplexEnvelope,
}

impl SpectralEvaluator {
    pub fn from_envelope(envelope: ComplexEnvelope) -> Self {
        Self { envelope }
    }

    pub fn eval(&self, nu: f64) -> Complex64 {
        let g = self.envelope.grid();
        let step = Complex64::from_polar(1.0, nu * g.dt());
        let mut phase = Complex64::from_polar(1.0, nu * g.t_start());
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, z) in self.envelope.samples().iter().enumerate() {
            acc += z * phase;
            if k % 256 == 255 {
                phase = Complex64::from_polar(1.0, nu * g.time(k + 1));
            } else {
                phase *= step;
            }
        }
        acc * g.dt()
    }

    /// Highest angular frequency the underlying samples resolve.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.envelope.grid().dt()
    }
}

/// Unitary discrete Fourier transform with the `e^{+i nu t}` analysis kernel.
pub fn spectral_transform(e: &ComplexEnvelope) -> SpectralAmplitude {
    let grid = e.grid();
    let n = grid.len();
    let mut buf = e.samples().to_vec();
    // inverse FFT computes Σ x_k e^{+2πi mk/n}
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let dnu = grid.frequency_step();
    let half = n / 2;
    let nu_start = -(half as f64) * dnu;
    let samples = (0..n)
        .map(|j| {
            let nu = nu_start + j as f64 * dnu;
            let m = (j as i64 - half as i64).rem_euclid(n as i64) as usize;
            buf[m] * Complex64::from_polar(grid.dt(), nu * grid.t_start())
        })
        .collect();
    SpectralAmplitude {
        nu_start,
        dnu,
        t_origin: grid.t_start(),
        samples,
    }
}

pub fn inverse_spectral_transform(s: &SpectralAmplitude) -> Result<ComplexEnvelope> {
    let grid = s.time_grid()?;
    let n = grid.len();
    let half = n / 2;
    if (s.nu_start + half as f64 * s.dnu).abs() > 1e-9 * s.dnu {
        return Err(Error::invalid(
            "inverse transform needs the centred spectral grid produced by spectral_transform",
        ));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (j, z) in s.samples.iter().enumerate() {
        let nu = s.frequency(j);
        let m = (j as i64 - half as i64).rem_euclid(n as i64) as usize;
        buf[m] = z * Complex64::from_polar(1.0, -nu * grid.t_start());
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let norm = 1.0 / (n as f64 * grid.dt());
    buf.iter_mut().for_each(|z| *z *= norm);
    Ok(ComplexEnvelope::from_parts(grid, buf))
}

/// Band-limited refinement by spectral zero padding: the result lives on
/// `grid.refined(factor)` and reproduces the input at the original samples.
pub fn refine_bandlimited(e: &ComplexEnvelope, factor: usize) -> Result<ComplexEnvelope> {
    if factor == 0 {
        return Err(Error::invalid("refinement factor must be at least 1"));
    }
    let grid = e.grid();
    if factor == 1 {
        return Ok(e.clone());
    }
    let n = grid.len();
    let big = n * factor;
    let mut planner = FftPlanner::new();
    let mut buf = e.samples().to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    let mut out = vec![Complex64::new(0.0, 0.0); big];
    let half = n / 2;
    for (m, z) in buf.iter().enumerate() {
        if n.is_multiple_of(2) && m == half {
            // split the Nyquist bin symmetrically
            out[half] += z * 0.5;
            out[big - half] += z * 0.5;
        } else if m < n.div_ceil(2) {
            out[m] = *z;
        } else {
            out[big - (n - m)] = *z;
        }
    }
    planner.plan_fft_inverse(big).process(&mut out);
    let scale = 1.0 / n as f64;
    out.iter_mut().for_each(|z| *z *= scale);
    Ok(ComplexEnvelope::from_parts(grid.refined(factor), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::gaussian;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid() -> TimeGrid {
        TimeGrid::centered(40.0, 2048).unwrap()
    }

    #[test]
    fn gaussian_transforms_to_gaussian_of_width_two_over_w() {
        let w = 1.3;
        let e = ComplexEnvelope::from_fn(grid(), |t| Complex64::new(gaussian(w, t), 0.0));
        let s = spectral_transform(&e);
        // ∫ e^{iνt} e^{-t²/w²} dt = w√π e^{-ν² w²/4}
        for (nu, z) in s.frequencies().zip(s.samples()) {
            let expected = w * PI.sqrt() * (-(nu * w / 2.0).powi(2)).exp();
            assert!((z - expected).norm() < 1e-12, "nu={nu}");
        }
        let half_width = 2.0 / w;
        let at = s.evaluator().unwrap().eval(half_width);
        assert!((at.norm() / (w * PI.sqrt()) - (-1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn time_shift_is_a_spectral_phase() {
        let g = grid();
        let delta = 1.7;
        let e0 = ComplexEnvelope::from_fn(g, |t| Complex64::new(gaussian(1.0, t), 0.0));
        let e1 = ComplexEnvelope::from_fn(g, |t| Complex64::new(gaussian(1.0, t - delta), 0.0));
        let s0 = spectral_transform(&e0);
        let s1 = spectral_transform(&e1);
        for (j, nu) in s0.frequencies().enumerate() {
            let expected = s0.samples()[j] * Complex64::from_polar(1.0, nu * delta);
            assert!((s1.samples()[j] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn evaluator_interpolates_samples() {
        let e = ComplexEnvelope::from_fn(grid(), |t| Complex64::new(t, 0.5) * gaussian(1.0, t - 0.4));
        let s = spectral_transform(&e);
        let ev = s.evaluator().unwrap();
        for j in [0, 17, 1024, 1500] {
            assert!((ev.eval(s.frequency(j)) - s.samples()[j]).norm() < 1e-11);
        }
    }

    #[test]
    fn refinement_interpolates_band_limited_pulses() {
        let g = TimeGrid::centered(32.0, 512).unwrap();
        let f = |t: f64| Complex64::new(t, -0.3) * gaussian(1.1, t - 0.5);
        let e = ComplexEnvelope::from_fn(g, f);
        let fine = refine_bandlimited(&e, 4).unwrap();
        assert_eq!(fine.grid().len(), 2048);
        for (k, t) in fine.grid().times().enumerate() {
            assert!((fine.samples()[k] - f(t)).norm() < 1e-12, "t={t}");
        }
        for k in 0..512 {
            assert!((fine.samples()[4 * k] - e.samples()[k]).norm() < 1e-13);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn parseval_and_round_trip(
            seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64),
            t0 in -3.0f64..3.0,
        ) {
            let g = TimeGrid::new(t0, 0.05, 64).unwrap();
            let samples = seed.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
            let e = ComplexEnvelope::new(g, samples).unwrap();
            let s = spectral_transform(&e);
            prop_assert!((s.norm_sqr() - e.norm_sqr()).abs() <= 1e-12 * e.norm_sqr());
            let back = inverse_spectral_transform(&s).unwrap();
            let err: f64 = back.samples().iter().zip(e.samples()).map(|(a, b)| (a - b).norm_sqr()).sum();
            let tot: f64 = e.samples().iter().map(|z| z.norm_sqr()).sum();
            prop_assert!(err.sqrt() <= 1e-12 * tot.sqrt());
        }
    }
}
