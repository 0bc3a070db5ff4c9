use serde::{Deserialize, Serialize};

use super::Scenario;
use crate::analytic::{converted_image, ThreeWaveParams};
use crate::envelope::{aligned_fidelity, fidelity, ComplexEnvelope, Interpolation};
use crate::error::Result;

/// Summary figures of one run, all recomputable from the input and output
/// fields plus the flux profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `∫|r_out|² / ∫|s_in|²`.
    pub efficiency: f64,
    /// `∫|s_out|² / ∫|s_in|²`.
    pub transmission: f64,
    /// Fidelity of `r_out` with the reversed, rescaled copy of `s_in`,
    /// maximised over the reversal axis (a pure delay is not a shape error).
    /// `None` when the offsets do not reverse.
    pub reversal_fidelity: Option<f64>,
    /// Delay of `r_out` relative to the impulsive-pump prediction at the
    /// fidelity optimum.
    pub reversal_offset: Option<f64>,
    /// Fidelity with the impulsive-pump prediction at its predicted position.
    pub mapped_fidelity: Option<f64>,
    /// Duration of `r_out` over duration of `s_in`.
    pub measured_m: Option<f64>,
    /// Largest relative deviation of the photon flux from its `z = 0` value.
    pub flux_error: f64,
}

/// `∫(|A_s|² + |A_r|²) dt`.
pub fn photon_flux(s: &ComplexEnvelope, r: &ComplexEnvelope) -> Result<f64> {
    s.grid().ensure_matches(r.grid())?;
    Ok(s.norm_sqr() + r.norm_sqr())
}

/// Converted field an ideal, complete conversion of `s_in` would produce.
pub fn ideal_converted(
    s_in: &ComplexEnvelope,
    params: &ThreeWaveParams,
    axis: f64,
) -> Result<ComplexEnvelope> {
    converted_image(
        s_in,
        params.sigma_r,
        params.sigma_s,
        params.length,
        axis,
        Interpolation::BandLimited,
    )
}

pub fn compute_metrics(
    sc: &Scenario,
    s_out: &ComplexEnvelope,
    r_out: &ComplexEnvelope,
    flux: &[(f64, f64)],
) -> Result<Metrics> {
    let input = sc.s_in.norm_sqr();
    let ratio = |x: f64| if input > 0.0 { x / input } else { 0.0 };
    let (mut reversal_fidelity, mut reversal_offset, mut mapped_fidelity) = (None, None, None);
    if sc.params.is_reversing() && input > 0.0 {
        let ideal = ideal_converted(&sc.s_in, &sc.params, sc.axis)?;
        let (f, delay) = aligned_fidelity(r_out, &ideal)?;
        reversal_fidelity = Some(f);
        // r_out(t) ≈ ideal(t + delay): the output lags by -delay
        reversal_offset = Some(-delay);
        mapped_fidelity = Some(fidelity(r_out, &ideal)?);
    }
    let measured_m = (input > 0.0 && r_out.norm_sqr() > 0.0).then(|| r_out.duration() / sc.s_in.duration());
    let f0 = flux.first().map_or(0.0, |f| f.1);
    let flux_error = if f0 > 0.0 {
        flux.iter().map(|f| (f.1 - f0).abs() / f0).fold(0.0, f64::max)
    } else {
        0.0
    };
    Ok(Metrics {
        efficiency: ratio(r_out.norm_sqr()),
        transmission: ratio(s_out.norm_sqr()),
        reversal_fidelity,
        reversal_offset,
        mapped_fidelity,
        measured_m,
        flux_error,
    })
}
