//! Quantum states of one matched pair of temporal modes.
//!
//! The s mode carries an envelope `φ(t)` and the r mode its reversed,
//! rescaled partner. For an impulsive pump the conversion acts on the pair
//! as a beam splitter, `a_s† → τ a_s† + iρ a_r†` and
//! `a_r† → τ a_r† + iρ a_s†`, so photon statistics follow from the usual
//! two-port algebra.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::{converted_image, ThreeWaveParams};
use crate::envelope::{parity_decompose, ComplexEnvelope, Interpolation};
use crate::error::{Error, Result};

/// Default photon-number cutoff per mode.
pub const DEFAULT_CUTOFF: usize = 4;

const UNITARITY_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-10;
/// Amplitudes below this are treated as numerically zero when checking
/// for cutoff overflow.
const NEGLIGIBLE: f64 = 1e-14;

fn check_unitary(tau: f64, rho: f64) -> Result<()> {
    let s = tau * tau + rho * rho;
    if (s - 1.0).abs() > UNITARITY_TOL || !s.is_finite() {
        return Err(Error::invalid(format!("tau^2 + rho^2 = {s}, expected 1")));
    }
    Ok(())
}

/// One Fock amplitude `c_{n_s, n_r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockAmplitude {
    pub n_s: usize,
    pub n_r: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// Row-major `(cutoff+1)²` coefficients, index `n_s * (cutoff+1) + n_r`.
    Fock { cutoff: usize, coeffs: Vec<Complex64> },
    Coherent { alpha: Complex64, beta: Complex64 },
}

/// State of the matched (s, r) temporal-mode pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "StateDump", try_from = "StateDump")]
pub struct TwoModeState {
    pub representation: Representation,
    /// Names of the s- and r-mode envelopes.
    pub modes: [String; 2],
}

/// JSON layout: basis labels with the non-zero amplitudes only.
#[derive(Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "snake_case", deny_unknown_fields)]
enum StateDump {
    Fock {
        modes: [String; 2],
        cutoff: usize,
        amplitudes: Vec<FockAmplitude>,
    },
    Coherent {
        modes: [String; 2],
        alpha: Complex64,
        beta: Complex64,
    },
}

impl From<TwoModeState> for StateDump {
    fn from(st: TwoModeState) -> Self {
        match st.representation {
            Representation::Fock { cutoff, coeffs } => StateDump::Fock {
                modes: st.modes,
                cutoff,
                amplitudes: coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| z.norm() > 0.0)
                    .map(|(i, z)| FockAmplitude {
                        n_s: i / (cutoff + 1),
                        n_r: i % (cutoff + 1),
                        re: z.re,
                        im: z.im,
                    })
                    .collect(),
            },
            Representation::Coherent { alpha, beta } => StateDump::Coherent {
                modes: st.modes,
                alpha,
                beta,
            },
        }
    }
}

impl TryFrom<StateDump> for TwoModeState {
    type Error = Error;

    fn try_from(d: StateDump) -> Result<Self> {
        match d {
            StateDump::Fock {
                modes,
                cutoff,
                amplitudes,
            } => {
                let terms: Vec<_> = amplitudes
                    .iter()
                    .map(|a| (a.n_s, a.n_r, Complex64::new(a.re, a.im)))
                    .collect();
                Ok(Self::fock(&terms, cutoff)?.with_modes(modes[0].clone(), modes[1].clone()))
            }
            StateDump::Coherent { modes, alpha, beta } => {
                let st = Self::coherent(alpha, beta).with_modes(modes[0].clone(), modes[1].clone());
                st.validate()?;
                Ok(st)
            }
        }
    }
}

impl TwoModeState {
    fn default_modes() -> [String; 2] {
        ["s".into(), "r".into()]
    }

    pub fn vacuum(cutoff: usize) -> Self {
        Self::fock_basis(0, 0, cutoff).expect("vacuum fits any cutoff")
    }

    /// `|n_s, n_r⟩`.
    pub fn fock_basis(n_s: usize, n_r: usize, cutoff: usize) -> Result<Self> {
        Self::fock(&[(n_s, n_r, Complex64::new(1.0, 0.0))], cutoff)
    }

    /// Superposition `Σ c |n_s, n_r⟩`; must be square-normalised.
    pub fn fock(terms: &[(usize, usize, Complex64)], cutoff: usize) -> Result<Self> {
        let side = cutoff + 1;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); side * side];
        for &(n_s, n_r, c) in terms {
            if n_s > cutoff || n_r > cutoff {
                return Err(Error::CutoffOverflow {
                    cutoff,
                    needed: n_s.max(n_r),
                });
            }
            coeffs[n_s * side + n_r] += c;
        }
        let st = Self {
            representation: Representation::Fock { cutoff, coeffs },
            modes: Self::default_modes(),
        };
        st.validate()?;
        Ok(st)
    }

    pub fn coherent(alpha: Complex64, beta: Complex64) -> Self {
        Self {
            representation: Representation::Coherent { alpha, beta },
            modes: Self::default_modes(),
        }
    }

    pub fn with_modes(mut self, s: impl Into<String>, r: impl Into<String>) -> Self {
        self.modes = [s.into(), r.into()];
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.representation {
            Representation::Fock { cutoff, coeffs } => {
                if coeffs.len() != (cutoff + 1) * (cutoff + 1) {
                    return Err(Error::invalid("Fock coefficient table does not match the cutoff"));
                }
                let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
                if (norm - 1.0).abs() > NORM_TOL {
                    return Err(Error::invalid(format!("Fock state norm is {norm}, expected 1")));
                }
                Ok(())
            }
            Representation::Coherent { alpha, beta } => {
                if alpha.is_nan() || beta.is_nan() {
                    return Err(Error::invalid("coherent amplitudes must be finite"));
                }
                Ok(())
            }
        }
    }

    /// `c_{n_s, n_r}`; zero outside the cutoff. Fock states only.
    pub fn amplitude(&self, n_s: usize, n_r: usize) -> Result<Complex64> {
        match &self.representation {
            Representation::Fock { cutoff, coeffs } => Ok(if n_s > *cutoff || n_r > *cutoff {
                Complex64::new(0.0, 0.0)
            } else {
                coeffs[n_s * (cutoff + 1) + n_r]
            }),
            Representation::Coherent { .. } => Err(Error::Unsupported("amplitude lookup on a coherent state".into())),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        match &self.representation {
            Representation::Fock { coeffs, .. } => coeffs.iter().map(|c| c.norm_sqr()).sum(),
            Representation::Coherent { .. } => 1.0,
        }
    }

    /// `(⟨n_s⟩, ⟨n_r⟩)`.
    pub fn mean_photons(&self) -> (f64, f64) {
        match &self.representation {
            Representation::Fock { cutoff, coeffs } => {
                let side = cutoff + 1;
                coeffs.iter().enumerate().fold((0.0, 0.0), |(a, b), (i, c)| {
                    let p = c.norm_sqr();
                    (a + (i / side) as f64 * p, b + (i % side) as f64 * p)
                })
            }
            Representation::Coherent { alpha, beta } => (alpha.norm_sqr(), beta.norm_sqr()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::parse("state JSON", e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("state JSON", e.to_string()))
    }
}

/// Envelopes of a matched pair: the s mode and the converted image it maps
/// to under complete conversion, both unit-normalised.
#[derive(Debug, Clone)]
pub struct ModePair {
    pub s: ComplexEnvelope,
    pub r: ComplexEnvelope,
}

impl ModePair {
    pub fn matched(phi: &ComplexEnvelope, params: &ThreeWaveParams, axis: f64) -> Result<Self> {
        let r = converted_image(
            phi,
            params.sigma_r,
            params.sigma_s,
            params.length,
            axis,
            Interpolation::BandLimited,
        )?;
        Ok(Self {
            s: phi.normalized(),
            r: r.normalized(),
        })
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Two-mode beam-splitter unitary on a Fock state.
pub fn beam_splitter_fock(st: &TwoModeState, tau: f64, rho: f64) -> Result<TwoModeState> {
    check_unitary(tau, rho)?;
    let Representation::Fock { cutoff, coeffs } = &st.representation else {
        return Err(Error::Unsupported("beam_splitter_fock needs a Fock state".into()));
    };
    let side = cutoff + 1;
    let t = Complex64::new(tau, 0.0);
    let ir = Complex64::new(0.0, rho);
    let mut out = vec![Complex64::new(0.0, 0.0); side * side];
    let mut overflow = 0usize;
    for (idx, &c) in coeffs.iter().enumerate() {
        if c.norm() == 0.0 {
            continue;
        }
        let (n, k) = (idx / side, idx % side);
        // (τ a† + iρ b†)^n (iρ a† + τ b†)^k / √(n! k!)
        let pre = c / (factorial(n) * factorial(k)).sqrt();
        for p in 0..=n {
            let head = binomial(n, p) * t.powu(p as u32) * ir.powu((n - p) as u32);
            for q in 0..=k {
                let amp = pre * head * binomial(k, q) * ir.powu(q as u32) * t.powu((k - q) as u32);
                let (na, nb) = (p + q, n - p + k - q);
                let amp = amp * (factorial(na) * factorial(nb)).sqrt();
                if na > *cutoff || nb > *cutoff {
                    if amp.norm() > NEGLIGIBLE {
                        overflow = overflow.max(na.max(nb));
                    }
                    continue;
                }
                out[na * side + nb] += amp;
            }
        }
    }
    if overflow > 0 {
        return Err(Error::CutoffOverflow {
            cutoff: *cutoff,
            needed: overflow,
        });
    }
    Ok(TwoModeState {
        representation: Representation::Fock {
            cutoff: *cutoff,
            coeffs: out,
        },
        modes: st.modes.clone(),
    })
}

/// `|α⟩_s|β⟩_r → |τα + iρβ⟩_s |τβ + iρα⟩_r`.
pub fn beam_splitter_coherent(alpha: Complex64, beta: Complex64, tau: f64, rho: f64) -> Result<(Complex64, Complex64)> {
    check_unitary(tau, rho)?;
    let ir = Complex64::new(0.0, rho);
    Ok((tau * alpha + ir * beta, tau * beta + ir * alpha))
}

/// Probability of one photon in each output mode for a `|1,1⟩` input.
pub fn hom_coincidence(tau: f64, rho: f64) -> Result<f64> {
    check_unitary(tau, rho)?;
    Ok((tau * tau - rho * rho).powi(2))
}

/// Composite two-stage transfer in the parity basis:
/// `[[red←even, red←odd], [blue←even, blue←odd]]`.
///
/// With interstage phase `φ` the red port carries `τ² s - ρ² e^{iφ} R s` and
/// the blue port `iτρ (s + e^{iφ} R s)`, where `R` reverses about the axis.
/// Even and odd inputs never mix, so each column only has to be normalised.
pub fn sorter_matrix(tau: f64, rho: f64, phase: f64) -> Result<[[Complex64; 2]; 2]> {
    check_unitary(tau, rho)?;
    let e = Complex64::from_polar(1.0, phase);
    let (t2, r2) = (tau * tau, rho * rho);
    let itr = Complex64::new(0.0, tau * rho);
    let one = Complex64::new(1.0, 0.0);
    Ok([[t2 - r2 * e, t2 + r2 * e], [itr * (one + e), itr * (one - e)]])
}

#[derive(Debug, Clone)]
pub struct SorterOutput {
    /// Unconverted band.
    pub red_envelope: ComplexEnvelope,
    /// Converted band.
    pub blue_envelope: ComplexEnvelope,
    pub red_prob: f64,
    pub blue_prob: f64,
}

/// Two-stage parity sorter: even components about `axis` exit blue, odd
/// ones red at a 50/50 split and zero interstage phase.
pub fn parity_sorter(
    input: &ComplexEnvelope,
    tau: f64,
    rho: f64,
    interstage_phase: f64,
    axis: f64,
) -> Result<SorterOutput> {
    let m = sorter_matrix(tau, rho, interstage_phase)?;
    let (even, odd) = parity_decompose(input, axis, Interpolation::BandLimited)?;
    let red_envelope = even.combine(m[0][0], &odd, m[0][1])?;
    let blue_envelope = even.combine(m[1][0], &odd, m[1][1])?;
    let total = input.norm_sqr();
    let prob = |e: &ComplexEnvelope| if total > 0.0 { e.norm_sqr() / total } else { 0.0 };
    Ok(SorterOutput {
        red_prob: prob(&red_envelope),
        blue_prob: prob(&blue_envelope),
        red_envelope,
        blue_envelope,
    })
}
