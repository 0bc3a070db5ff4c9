use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform sampling of the local-time axis.
///
/// Sample `k` sits at `t_start + k * dt`. Spectral operations treat the
/// window `[t_start, t_start + n * dt)` as one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_start: f64,
    dt: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        if !t_start.is_finite() {
            return Err(Error::invalid("grid start must be finite"));
        }
        if n < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 samples, got {n}")));
        }
        Ok(Self { t_start, dt, n })
    }

    /// Grid of `n` samples covering `[-span/2, span/2)`.
    pub fn centered(span: f64, n: usize) -> Result<Self> {
        if !(span > 0.0) {
            return Err(Error::invalid(format!("grid span must be positive, got {span}")));
        }
        Self::new(-span / 2.0, span / n as f64, n)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt
    }

    /// Time of the last sample.
    pub fn t_last(&self) -> f64 {
        self.time(self.n - 1)
    }

    /// Period length `n * dt`.
    pub fn span(&self) -> f64 {
        self.n as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.time(k))
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_start && t <= self.t_last()
    }

    /// Fractional sample index of `t`.
    pub fn position(&self, t: f64) -> f64 {
        (t - self.t_start) / self.dt
    }

    /// Same start and period with `factor` times as many samples.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            t_start: self.t_start,
            dt: self.dt / factor as f64,
            n: self.n * factor,
        }
    }

    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / self.span()
    }

    /// Signed angular frequency of FFT bin `m` (bins above `n/2` are negative).
    pub fn bin_frequency(&self, m: usize) -> f64 {
        let m = m as i64;
        let n = self.n as i64;
        let signed = if m < (n + 1) / 2 { m } else { m - n };
        signed as f64 * self.frequency_step()
    }

    pub fn bin_frequencies(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.bin_frequency(m)).collect()
    }

    pub fn matches(&self, other: &TimeGrid) -> bool {
        let tol = 1e-12 * self.dt.max(self.span());
        self.n == other.n
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
            && (self.t_start - other.t_start).abs() <= tol
    }

    pub fn ensure_matches(&self, other: &TimeGrid) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(t_start={}, dt={}, n={}) vs (t_start={}, dt={}, n={})",
                self.t_start, self.dt, self.n, other.t_start, other.dt, other.n
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(TimeGrid::new(0.0, 0.0, 16).is_err());
        assert!(TimeGrid::new(0.0, -1.0, 16).is_err());
        assert!(TimeGrid::new(0.0, 0.1, 1).is_err());
        assert!(TimeGrid::centered(0.0, 16).is_err());
    }

    #[test]
    fn centered_grid_layout() {
        let g = TimeGrid::centered(32.0, 4096).unwrap();
        assert_eq!(g.t_start(), -16.0);
        assert_eq!(g.dt(), 1.0 / 128.0);
        assert_eq!(g.time(2048), 0.0);
        assert_eq!(g.span(), 32.0);
    }

    #[test]
    fn refinement_keeps_coarse_points() {
        let g = TimeGrid::centered(8.0, 64).unwrap();
        let f = g.refined(2);
        for k in 0..g.len() {
            assert_eq!(g.time(k), f.time(2 * k));
        }
    }

    #[test]
    fn bin_frequencies_are_signed() {
        let g = TimeGrid::new(0.0, 1.0, 8).unwrap();
        let w = g.frequency_step();
        let f = g.bin_frequencies();
        assert_eq!(f[1], w);
        assert_eq!(f[4], -4.0 * w);
        assert_eq!(f[7], -w);
    }
}
