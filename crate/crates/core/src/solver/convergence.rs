use serde::{Deserialize, Serialize};

use super::{propagate, Scenario};
use crate::envelope::{refine_bandlimited, ComplexEnvelope, TimeGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLevel {
    pub n: usize,
    pub z_steps: usize,
    /// L2 distance (both fields, on the base grid) to the next finer level.
    pub diff_to_next: Option<f64>,
    /// Samples across the pump's characteristic time.
    pub samples_per_pump: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub levels: Vec<ConvergenceLevel>,
    /// `log2(d_k / d_{k+1})` for successive differences.
    pub orders: Vec<f64>,
}

impl ConvergenceReport {
    /// Order estimate from the finest pair of differences.
    pub fn observed_order(&self) -> Option<f64> {
        self.orders.last().copied()
    }
}

fn decimate(e: &ComplexEnvelope, base: &TimeGrid, factor: usize) -> Vec<num_complex::Complex64> {
    debug_assert_eq!(e.grid().len(), base.len() * factor);
    e.samples().iter().step_by(factor).copied().collect()
}

/// Self-convergence of the split-step scheme: `levels` runs, each halving
/// `dz` and `dt`, compared on the base time grid.
pub fn convergence_study(sc: &Scenario, levels: usize) -> Result<ConvergenceReport> {
    if levels < 3 {
        return Err(Error::invalid(format!("convergence study needs at least 3 levels, got {levels}")));
    }
    let base = sc.grid.time;
    let pump_time = sc.pump.characteristic_time();
    let mut outputs = Vec::with_capacity(levels);
    let mut grids = Vec::with_capacity(levels);
    for k in 0..levels {
        let factor = 1usize << k;
        let grid = sc.grid.refined(factor);
        let refined = Scenario {
            s_in: refine_bandlimited(&sc.s_in, factor)?,
            r_in: refine_bandlimited(&sc.r_in, factor)?,
            grid,
            record_map: None,
            ..sc.clone()
        };
        let p = propagate(&refined)?;
        let s = decimate(&p.s_out, &base, factor);
        let r = decimate(&p.r_out, &base, factor);
        outputs.push((s, r));
        grids.push(grid);
    }
    let dt = base.dt();
    let diffs: Vec<f64> = outputs
        .windows(2)
        .map(|w| {
            let sum: f64 = w[0]
                .0
                .iter()
                .zip(&w[1].0)
                .chain(w[0].1.iter().zip(&w[1].1))
                .map(|(a, b)| (a - b).norm_sqr())
                .sum();
            (sum * dt).sqrt()
        })
        .collect();
    let orders = diffs.windows(2).map(|d| (d[0] / d[1]).log2()).collect();
    let levels = grids
        .iter()
        .enumerate()
        .map(|(k, g)| ConvergenceLevel {
            n: g.time.len(),
            z_steps: g.z_steps,
            diff_to_next: diffs.get(k).copied(),
            samples_per_pump: pump_time / g.time.dt(),
        })
        .collect();
    Ok(ConvergenceReport { levels, orders })
}
