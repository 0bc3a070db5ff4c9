//! First-order (weak conversion) spectral picture.
//!
//! To first order in the coupling a signal photon with spectral amplitude
//! `φ(ν)` is converted into `φ_r(ν') ∝ ∫ dν/2π Φ(ν, ν') φ_p(ν' - ν) φ(ν)`,
//! where `Φ = L sinc(Δβ L / 2)` and `Δβ = σ_s ν - σ_r ν'`. For a long medium
//! `Φ` collapses onto the ridge `ν' = m ν` with `m = σ_s/σ_r`, giving
//! `φ_r(ν') ∝ φ_p((m-1) ν'/m) φ(ν'/m)`: a mirrored spectrum when `m < 0`.
//!
//! Frequencies are baseband offsets from each band centre. Quantum
//! prefactors are lumped into one coupling constant; the pump enters only
//! through its c-number spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;
use crate::analytic::{resolution_checks, Bandwidths, ConditionReport, ThreeWaveParams};
use crate::envelope::{SpectralAmplitude, SpectralEvaluator};
use crate::error::{Error, Result};

/// Relative spectral magnitude that bounds a band for coverage checks.
const BAND_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct TransferSetup {
    pub sigma_s: f64,
    pub sigma_r: f64,
    pub length: f64,
    /// Pump spectral amplitude, unit-normalised.
    pub pump_spectrum: SpectralAmplitude,
    /// Lumped coupling constant.
    pub coupling: f64,
    /// Pump group slowness in the same units as the offsets.
    pub beta_p_prime: f64,
}

impl TransferSetup {
    pub fn new(
        sigma_s: f64,
        sigma_r: f64,
        length: f64,
        pump_spectrum: SpectralAmplitude,
        coupling: f64,
    ) -> Result<Self> {
        if sigma_r == 0.0 || sigma_s == 0.0 {
            return Err(Error::invalid("slowness offsets must be non-zero"));
        }
        if !(length > 0.0) {
            return Err(Error::invalid(format!("medium length must be positive, got {length}")));
        }
        let norm = pump_spectrum.norm_sqr();
        if norm == 0.0 {
            return Err(Error::invalid("pump spectrum vanishes"));
        }
        Ok(Self {
            sigma_s,
            sigma_r,
            length,
            pump_spectrum: pump_spectrum.normalized(),
            coupling,
            beta_p_prime: 1.0,
        })
    }

    /// Spectral magnification `σ_s / σ_r`.
    pub fn m(&self) -> f64 {
        self.sigma_s / self.sigma_r
    }
}

/// `Δβ = σ_s ν - σ_r ν'`.
pub fn phase_mismatch(nu: f64, nu_prime: f64, setup: &TransferSetup) -> f64 {
    setup.sigma_s * nu - setup.sigma_r * nu_prime
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `∫_{-L/2}^{L/2} dz e^{iΔβ z} = L sinc(Δβ L / 2)`; real for the
/// symmetric medium.
pub fn phase_matching_function(nu: f64, nu_prime: f64, setup: &TransferSetup) -> Complex64 {
    let db = phase_mismatch(nu, nu_prime, setup);
    Complex64::new(setup.length * sinc(db * setup.length / 2.0), 0.0)
}

/// Significant band `[lo, hi]` of a sampled spectrum.
fn band(s: &SpectralAmplitude) -> Option<(f64, f64)> {
    let peak = s.samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let cut = BAND_THRESHOLD * peak;
    let first = s.samples().iter().position(|z| z.norm() > cut)?;
    let last = s.samples().iter().rposition(|z| z.norm() > cut)?;
    Some((s.frequency(first), s.frequency(last)))
}

fn check_pump_coverage(signal: &SpectralAmplitude, setup: &TransferSetup) -> Result<()> {
    let Some((lo, hi)) = band(signal) else {
        return Ok(());
    };
    let k = setup.m() - 1.0;
    let (a, b) = (k * lo, k * hi);
    let (need_lo, need_hi) = (a.min(b), a.max(b));
    let p = &setup.pump_spectrum;
    if need_lo < p.nu_start() || need_hi > p.nu_last() {
        return Err(Error::GridOverflow {
            what: "pump spectrum over (m-1) times the signal band".into(),
            needed_lo: need_lo,
            needed_hi: need_hi,
            grid_lo: p.nu_start(),
            grid_hi: p.nu_last(),
        });
    }
    Ok(())
}

/// Output frequency grid: the signal grid stretched by `|m|`, so the
/// converted band occupies the same number of samples.
fn output_grid(signal: &SpectralAmplitude, m: f64) -> (f64, f64, f64) {
    let a = m.abs();
    (signal.nu_start() * a, signal.dnu() * a, signal.t_origin() / a)
}

/// Unit-norm converted spectral amplitude in the long-medium limit,
/// `φ_r(ν') ∝ φ_p((m-1)ν'/m) φ(ν'/m)`, on the signal grid stretched by `|m|`.
pub fn first_order_output(signal: &SpectralAmplitude, setup: &TransferSetup) -> Result<SpectralAmplitude> {
    check_pump_coverage(signal, setup)?;
    let m = setup.m();
    let sig = signal.evaluator()?;
    let pump = setup.pump_spectrum.evaluator()?;
    let (nu_start, dnu, t_origin) = output_grid(signal, m);
    let samples = (0..signal.len())
        .map(|j| {
            let nu_r = nu_start + j as f64 * dnu;
            pump.eval((m - 1.0) * nu_r / m) * sig.eval(nu_r / m)
        })
        .collect();
    let out = SpectralAmplitude::new(nu_start, dnu, t_origin, samples)?;
    if out.norm_sqr() == 0.0 {
        return Err(Error::Numerical {
            step: 0,
            reason: "pump and signal spectra do not overlap".into(),
        });
    }
    Ok(out.normalized())
}

/// Unnormalised conversion weight `C² ∫ dν/2π |φ_p((m-1)ν)|² |φ(ν)|²`, a
/// relative conversion probability.
pub fn conversion_weight(signal: &SpectralAmplitude, setup: &TransferSetup) -> Result<f64> {
    check_pump_coverage(signal, setup)?;
    let pump = setup.pump_spectrum.evaluator()?;
    let k = setup.m() - 1.0;
    let sum: f64 = signal
        .frequencies()
        .zip(signal.samples())
        .map(|(nu, z)| pump.eval(k * nu).norm_sqr() * z.norm_sqr())
        .sum();
    Ok(setup.coupling.powi(2) * sum * signal.dnu() / (2.0 * PI))
}

/// Finite-length first-order output by direct quadrature over the signal
/// band, `∫ dν/2π Φ(ν, ν') φ_p(ν' - ν) φ(ν)`, unit-normalised on the same
/// grid as [`first_order_output`].
pub fn finite_length_output(signal: &SpectralAmplitude, setup: &TransferSetup) -> Result<SpectralAmplitude> {
    let m = setup.m();
    let pump: SpectralEvaluator = setup.pump_spectrum.evaluator()?;
    let (nu_start, dnu, t_origin) = output_grid(signal, m);
    let samples = (0..signal.len())
        .map(|j| {
            let nu_r = nu_start + j as f64 * dnu;
            let acc: Complex64 = signal
                .frequencies()
                .zip(signal.samples())
                .map(|(nu, z)| phase_matching_function(nu, nu_r, setup) * pump.eval(nu_r - nu) * z)
                .sum();
            acc * signal.dnu() / (2.0 * PI)
        })
        .collect();
    Ok(SpectralAmplitude::new(nu_start, dnu, t_origin, samples)?.normalized())
}

/// Long-medium conditions under which the phase-matching function acts as
/// a delta function on the ridge `ν' = m ν`.
pub fn delta_limit_check(setup: &TransferSetup, bw: &Bandwidths, factor: f64) -> ConditionReport {
    let params = ThreeWaveParams {
        sigma_s: setup.sigma_s,
        sigma_r: setup.sigma_r,
        gamma: 0.0,
        length: setup.length,
    };
    ConditionReport {
        checks: resolution_checks(&params, bw, setup.beta_p_prime, factor),
    }
}

/// `|<a, b>|² / (|a|² |b|²)` for spectra on the same grid.
pub fn spectral_fidelity(a: &SpectralAmplitude, b: &SpectralAmplitude) -> Result<f64> {
    let ov = a.inner(b)?;
    let den = a.norm_sqr() * b.norm_sqr();
    Ok(if den == 0.0 { 0.0 } else { ov.norm_sqr() / den })
}

/// Spectrum of `φ(-ν)` on the same grid, via continuous evaluation.
pub fn mirrored(s: &SpectralAmplitude) -> Result<SpectralAmplitude> {
    let ev = s.evaluator()?;
    s.with_samples(s.frequencies().map(|nu| ev.eval(-nu)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::DEFAULT_CONDITION_FACTOR;
    use crate::envelope::{envelope_reverse, inverse_spectral_transform, spectral_transform, ComplexEnvelope, Interpolation, TimeGrid};
    use crate::pulse::gaussian;
    use proptest::prelude::*;

    fn grid() -> TimeGrid {
        TimeGrid::centered(64.0, 1024).unwrap()
    }

    /// Gaussian pump whose spectral 1/e half-width is `bandwidth`.
    fn pump(bandwidth: f64) -> SpectralAmplitude {
        let w = 2.0 / bandwidth;
        let dt = (w / 8.0).min(0.1);
        let g = TimeGrid::centered(1024.0 * dt, 1024).unwrap();
        SpectralAmplitude::from_fn(&g, |nu| Complex64::new((-(nu * w / 2.0).powi(2)).exp(), 0.0))
    }

    fn asymmetric_signal() -> SpectralAmplitude {
        let e = ComplexEnvelope::from_fn(grid(), |t| Complex64::new((t + 0.4) * gaussian(1.0, t), 0.0));
        spectral_transform(&e.normalized())
    }

    fn setup(sigma_r: f64, bandwidth: f64) -> TransferSetup {
        TransferSetup::new(0.5, sigma_r, 20.0, pump(bandwidth), 1.0).unwrap()
    }

    #[test]
    fn mismatch_arithmetic() {
        let s = setup(-0.5, 10.0);
        assert_eq!(phase_mismatch(0.0, 0.0, &s), 0.0);
        assert_eq!(phase_mismatch(2.0, 1.0, &s), 1.5);
        for nu in [-3.0, 0.7, 5.0] {
            assert!(phase_mismatch(nu, s.m() * nu, &s).abs() < 1e-15);
        }
    }

    #[test]
    fn phase_matching_special_points() {
        let s = setup(-0.5, 10.0);
        assert_eq!(phase_matching_function(0.0, 0.0, &s).re, 20.0);
        // Δβ = 2π/L: ν = 4π/(σ_s L) with ν' = 0
        let nu = 2.0 * PI / 20.0 / 0.5;
        assert!(phase_matching_function(nu, 0.0, &s).norm() < 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn phase_matching_matches_quadrature(nu in -3.0f64..3.0, nu_p in -3.0f64..3.0) {
            let s = setup(-0.5, 10.0);
            // composite Simpson on [-L/2, L/2]
            let n = 20_000;
            let h = s.length / n as f64;
            let db = phase_mismatch(nu, nu_p, &s);
            let f = |z: f64| Complex64::from_polar(1.0, db * z);
            let mut acc = f(-s.length / 2.0) + f(s.length / 2.0);
            for k in 1..n {
                let z = -s.length / 2.0 + k as f64 * h;
                acc += f(z) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            let quad = acc * h / 3.0;
            prop_assert!((quad - phase_matching_function(nu, nu_p, &s)).norm() < 1e-8);
        }

        #[test]
        fn output_has_unit_norm(a in -1.0f64..1.0, b in 0.5f64..2.0, bp in 3.0f64..40.0) {
            let e = ComplexEnvelope::from_fn(grid(), |t| Complex64::new(t + a, 0.3) * gaussian(b, t));
            let out = first_order_output(&spectral_transform(&e), &setup(-0.5, bp)).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn broad_pump_mirrors_the_spectrum() {
        let signal = asymmetric_signal();
        let out = first_order_output(&signal, &setup(-0.5, 200.0)).unwrap();
        let f = spectral_fidelity(&out, &mirrored(&signal).unwrap()).unwrap();
        assert!(f >= 0.999, "{f}");
    }

    #[test]
    fn equal_offsets_do_not_mirror() {
        let signal = asymmetric_signal();
        let out = first_order_output(&signal, &setup(0.5, 2.0)).unwrap();
        assert!((spectral_fidelity(&out, &signal).unwrap() - 1.0).abs() < 1e-12);
        assert!(spectral_fidelity(&out, &mirrored(&signal).unwrap()).unwrap() < 0.9);
    }

    #[test]
    fn narrow_pump_filters_the_mirror() {
        // B_p = B_s = 2 for a width-1 Gaussian signal; oracle evaluates the
        // closed-form spectra directly.
        let w = 1.0;
        let e = ComplexEnvelope::from_fn(grid(), |t| Complex64::new(gaussian(w, t - 0.3), 0.0));
        let signal = spectral_transform(&e);
        let out = first_order_output(&signal, &setup(-0.5, 2.0)).unwrap();
        let wp = 2.0 / 2.0;
        let oracle: Vec<Complex64> = out
            .frequencies()
            .map(|nu| {
                let p = (-(2.0 * nu * wp / 2.0).powi(2)).exp();
                let s = Complex64::from_polar((-(nu * w / 2.0).powi(2)).exp(), -nu * 0.3);
                p * s
            })
            .collect();
        let oracle = out.with_samples(oracle).unwrap().normalized();
        for (a, b) in out.samples().iter().zip(oracle.samples()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn finite_medium_approaches_the_ridge_limit() {
        let e = ComplexEnvelope::from_fn(TimeGrid::centered(64.0, 256).unwrap(), |t| {
            Complex64::new((t + 0.4) * gaussian(1.0, t), 0.0)
        });
        let signal = spectral_transform(&e.normalized());
        let mut last = 0.0;
        for length in [5.0, 20.0, 80.0] {
            let mut s = setup(-0.5, 2.0);
            s.length = length;
            let limit = first_order_output(&signal, &s).unwrap();
            let quad = finite_length_output(&signal, &s).unwrap();
            let f = spectral_fidelity(&limit, &quad).unwrap();
            assert!(f > last, "L={length}: {f}");
            last = f;
        }
        assert!(last > 0.99, "{last}");
    }

    #[test]
    fn mirror_fidelity_grows_with_pump_bandwidth() {
        let e = ComplexEnvelope::from_fn(grid(), |t| Complex64::new(gaussian(1.0, t), 0.0));
        let signal = spectral_transform(&e);
        let target = mirrored(&signal).unwrap();
        let mut last = 0.0;
        for ratio in [2.0, 5.0, 10.0, 20.0, 50.0] {
            let out = first_order_output(&signal, &setup(-0.5, 2.0 * ratio)).unwrap();
            let f = spectral_fidelity(&out, &target).unwrap();
            assert!(f >= last, "ratio {ratio}: {f} < {last}");
            last = f;
        }
        assert!(last >= 0.999);
    }

    #[test]
    fn time_domain_view_is_envelope_reversal() {
        let e = ComplexEnvelope::from_fn(grid(), |t| Complex64::new(t + 0.4, 0.2) * gaussian(1.0, t)).normalized();
        let out = first_order_output(&spectral_transform(&e), &setup(-0.5, 500.0)).unwrap();
        let back = inverse_spectral_transform(&out).unwrap();
        let rev = envelope_reverse(&e, 0.0, Interpolation::BandLimited).unwrap();
        // unit-norm vectors; compare up to the global phase
        let phase = crate::envelope::overlap(&back, &rev).unwrap();
        let aligned = back.scaled(phase / phase.norm());
        assert!(aligned.sub(&rev).unwrap().norm() < 1e-3);
    }

    #[test]
    fn narrow_pump_grid_is_rejected() {
        let signal = asymmetric_signal();
        let g = TimeGrid::centered(64.0, 64).unwrap();
        let narrow = spectral_transform(&ComplexEnvelope::from_fn(g, |t| Complex64::new(gaussian(0.1, t), 0.0)));
        let s = TransferSetup::new(0.5, -0.5, 20.0, narrow, 1.0).unwrap();
        assert!(matches!(first_order_output(&signal, &s), Err(Error::GridOverflow { .. })));
    }

    #[test]
    fn delta_limit_conditions() {
        let bw = Bandwidths {
            pump: 13.3,
            signal: 2.0,
            converted: 2.0,
        };
        let s = setup(-0.5, 13.3);
        let base = delta_limit_check(&s, &bw, DEFAULT_CONDITION_FACTOR);
        let mut long = setup(-0.5, 13.3);
        long.length *= 10.0;
        let longer = delta_limit_check(&long, &bw, DEFAULT_CONDITION_FACTOR);
        for (a, b) in base.checks.iter().zip(&longer.checks) {
            assert!((b.ratio.unwrap() / a.ratio.unwrap() - 10.0).abs() < 1e-12);
        }
        // 2π/(|σ_s| L) = B_s exactly
        let mut edge = setup(-0.5, 13.3);
        edge.length = 2.0 * PI / (0.5 * 2.0);
        let r = delta_limit_check(&edge, &bw, DEFAULT_CONDITION_FACTOR);
        let c = r.get("signal_long_medium").unwrap();
        assert!((c.ratio.unwrap() - 1.0).abs() < 1e-12 && !c.pass);
    }

    #[test]
    fn conversion_weight_scales_with_coupling() {
        let signal = asymmetric_signal();
        let mut s = setup(-0.5, 20.0);
        let w1 = conversion_weight(&signal, &s).unwrap();
        s.coupling = 3.0;
        assert!((conversion_weight(&signal, &s).unwrap() / w1 - 9.0).abs() < 1e-12);
    }
}
