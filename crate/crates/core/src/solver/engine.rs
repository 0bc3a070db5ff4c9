use std::collections::BTreeMap;

use crate::analytic::{apply_io_map, conversion_coeffs, pump_area_complex};
use crate::envelope::{ComplexEnvelope, Interpolation};
use crate::error::{Error, Result};

use super::{propagate, FieldMap, Scenario};

/// Output fields of one propagation engine.
#[derive(Debug, Clone)]
pub struct EngineOutput {
    pub s_out: ComplexEnvelope,
    pub r_out: ComplexEnvelope,
    /// Per-step photon flux; engines without a z axis report the two ends.
    pub flux: Vec<(f64, f64)>,
    pub map: Option<FieldMap>,
    pub warnings: Vec<String>,
}

/// A way of turning a scenario's inputs into its outputs at `z = L`.
pub trait Engine: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, sc: &Scenario) -> Result<EngineOutput>;
}

/// Strang-split numerical integration.
pub struct SplitStepEngine;

impl Engine for SplitStepEngine {
    fn name(&self) -> &'static str {
        "split_step"
    }

    fn run(&self, sc: &Scenario) -> Result<EngineOutput> {
        let p = propagate(sc)?;
        Ok(EngineOutput {
            s_out: p.s_out,
            r_out: p.r_out,
            flux: p.flux,
            map: p.map,
            warnings: p.warnings,
        })
    }
}

/// Impulsive-pump beam-splitter map.
pub struct AnalyticEngine {
    pub interpolation: Interpolation,
}

impl Engine for AnalyticEngine {
    fn name(&self) -> &'static str {
        "analytic"
    }

    fn run(&self, sc: &Scenario) -> Result<EngineOutput> {
        sc.validate()?;
        let area = pump_area_complex(&sc.pump, f64::INFINITY)?;
        let mut warnings = Vec::new();
        if area.im != 0.0 {
            let msg = format!("complex pump: closed-form coefficients use |eps_p| = {:.6}", area.norm());
            log::warn!("{msg}");
            warnings.push(msg);
        }
        let eps = if area.im == 0.0 { area.re } else { area.norm() };
        let c = conversion_coeffs(&sc.params, eps)?;
        let (s_out, r_out) = apply_io_map(&sc.s_in, &sc.r_in, &c, sc.axis, self.interpolation)?;
        let flux = vec![
            (0.0, sc.s_in.norm_sqr() + sc.r_in.norm_sqr()),
            (sc.params.length, s_out.norm_sqr() + r_out.norm_sqr()),
        ];
        Ok(EngineOutput {
            s_out,
            r_out,
            flux,
            map: None,
            warnings,
        })
    }
}

/// Engines selectable by name.
pub struct EngineRegistry {
    engines: BTreeMap<&'static str, Box<dyn Engine>>,
}

impl Default for EngineRegistry {
    fn default() -> Self {
        let mut r = Self {
            engines: BTreeMap::new(),
        };
        r.register(Box::new(SplitStepEngine));
        r.register(Box::new(AnalyticEngine {
            interpolation: Interpolation::BandLimited,
        }));
        r
    }
}

impl EngineRegistry {
    pub fn register(&mut self, engine: Box<dyn Engine>) {
        self.engines.insert(engine.name(), engine);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Engine> {
        self.engines.get(name).map(|e| e.as_ref()).ok_or_else(|| {
            Error::invalid(format!(
                "unknown engine `{name}` (available: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.engines.keys().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{PumpPulse, ThreeWaveParams};
    use crate::envelope::{relative_l2, TimeGrid};
    use crate::pulse::gaussian;
    use crate::solver::SimulationGrid;
    use num_complex::Complex64;

    #[test]
    fn registry_lookup() {
        let reg = EngineRegistry::default();
        assert_eq!(reg.names(), vec!["analytic", "split_step"]);
        assert_eq!(reg.get("split_step").unwrap().name(), "split_step");
        assert!(reg.get("euler").is_err());
    }

    #[test]
    fn engines_agree_for_a_short_pump() {
        let time = TimeGrid::centered(32.0, 2048).unwrap();
        let s_in = ComplexEnvelope::from_fn(time, |t| Complex64::new(gaussian(1.0, t + 6.0), 0.0)).normalized();
        let sc = Scenario {
            params: ThreeWaveParams::new(0.5, -0.5, 1.74, 20.0).unwrap(),
            pump: PumpPulse::gaussian(4.0, 0.0375),
            s_in,
            r_in: ComplexEnvelope::zeros(time),
            grid: SimulationGrid::new(time, 1000, 20.0).unwrap(),
            axis: 0.0,
            record_map: None,
        };
        let reg = EngineRegistry::default();
        let a = reg.get("analytic").unwrap().run(&sc).unwrap();
        let b = reg.get("split_step").unwrap().run(&sc).unwrap();
        assert!(relative_l2(&a.r_out, &b.r_out, 1.0).unwrap() < 0.02);
    }
}
