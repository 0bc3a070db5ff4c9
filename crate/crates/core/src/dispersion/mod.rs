//! Material dispersion and device feasibility.
//!
//! Wavelengths are vacuum values in nm, angular frequencies in rad/ps,
//! slownesses in ps/m and lengths in m. A design point collects the slowness
//! offsets of the signal and converted bands from the pump, the resulting
//! magnifications and the walk-off bound on reversible pulse duration.

mod models;
mod spline;

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use models::{
    load_model, read_rows_csv, tabulate_index, ConstantIndex, DispersionModel, IndexTable, MaterialFile,
    ModelRegistry, Sellmeier, SellmeierCoefficients, SlownessTable,
};
pub use spline::Interpolant;

/// Vacuum speed of light in m/ps.
pub const SPEED_OF_LIGHT: f64 = 2.99792458e-4;

/// `ω = 2πc/λ` in rad/ps for `λ` in nm.
pub fn omega_of(wavelength_nm: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / (wavelength_nm * 1e-9)
}

pub fn wavelength_of(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega * 1e9
}

fn in_range(model: &dyn DispersionModel, wavelength_nm: f64) -> Result<f64> {
    let (lo, hi) = model.valid_range_nm();
    if !(wavelength_nm >= lo && wavelength_nm <= hi) {
        return Err(Error::invalid(format!(
            "{wavelength_nm} nm lies outside the {} validity range [{lo}, {hi}] nm",
            model.name()
        )));
    }
    Ok(omega_of(wavelength_nm))
}

/// Propagation constant `β = n ω / c` in 1/m.
pub fn beta(model: &dyn DispersionModel, wavelength_nm: f64) -> Result<f64> {
    model.beta_at(in_range(model, wavelength_nm)?)
}

/// Group slowness `β' = dβ/dω` in ps/m.
pub fn group_slowness(model: &dyn DispersionModel, wavelength_nm: f64) -> Result<f64> {
    model.slowness_at(in_range(model, wavelength_nm)?)
}

/// Group-velocity dispersion `β'' = d²β/dω²` in ps²/m.
pub fn gvd(model: &dyn DispersionModel, wavelength_nm: f64) -> Result<f64> {
    model.gvd_at(in_range(model, wavelength_nm)?)
}

/// Wavelengths in `[lo, hi]` where the GVD changes sign, scanned at `step`
/// and refined by bisection.
pub fn zero_gvd_wavelengths(model: &dyn DispersionModel, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi > lo) {
        return Err(Error::invalid("zero-GVD scan needs lo < hi and a positive step"));
    }
    let n = ((hi - lo) / step).ceil() as usize;
    let at = |k: usize| (lo + k as f64 * step).min(hi);
    let mut roots = Vec::new();
    let mut prev = gvd(model, at(0))?;
    for k in 1..=n {
        let cur = gvd(model, at(k))?;
        if prev == 0.0 {
            roots.push(at(k - 1));
        } else if prev.signum() != cur.signum() && cur != 0.0 {
            let (mut a, mut b, mut fa) = (at(k - 1), at(k), prev);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                let fm = gvd(model, mid)?;
                if fm.signum() == fa.signum() {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev = cur;
    }
    Ok(roots)
}

/// Sum-frequency band: `1/λ_r = 1/λ_s + 1/λ_p`.
pub fn sfg_idler_wavelength(lambda_s: f64, lambda_p: f64) -> f64 {
    1.0 / (1.0 / lambda_s + 1.0 / lambda_p)
}

/// Bragg-scattering band: `ω_r = ω_s + ω_p1 - ω_p2`.
pub fn bragg_idler_wavelength(lambda_s: f64, lambda_p1: f64, lambda_p2: f64) -> Result<f64> {
    let inv = 1.0 / lambda_s + 1.0 / lambda_p1 - 1.0 / lambda_p2;
    if !(inv > 0.0) {
        return Err(Error::invalid(format!(
            "Bragg scattering of {lambda_s} nm with pumps {lambda_p1}/{lambda_p2} nm has no positive frequency"
        )));
    }
    Ok(1.0 / inv)
}

/// Quasi-phase-matching period in µm, `2π/|β_r - β_s - β_p|`. `None` when the
/// process is already phase matched and needs no poling.
pub fn qpm_poling_period(model: &dyn DispersionModel, lambda_s: f64, lambda_p: f64) -> Result<Option<f64>> {
    let lambda_r = sfg_idler_wavelength(lambda_s, lambda_p);
    let (bs, bp, br) = (
        beta(model, lambda_s)?,
        beta(model, lambda_p)?,
        beta(model, lambda_r)?,
    );
    let mismatch = br - bs - bp;
    if mismatch.abs() <= 1e-12 * br.abs() {
        return Ok(None);
    }
    Ok(Some(2.0 * PI / mismatch.abs() * 1e6))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub lambda_s: f64,
    /// The short (reversing) pump.
    pub lambda_p: f64,
    /// Second, long pump of a Bragg-scattering process.
    pub lambda_p2: Option<f64>,
    pub lambda_r: f64,
    /// µm; `None` when no poling applies.
    pub poling_period: Option<f64>,
    /// ps/m.
    pub sigma_s: f64,
    pub sigma_r: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub magnification: f64,
    /// Walk-off `|σ_η| L` in ps.
    pub t_max_s: f64,
    pub t_max_r: f64,
    pub length: f64,
    pub feasible: bool,
}

fn assemble(
    model: &dyn DispersionModel,
    lambda_s: f64,
    lambda_p: f64,
    lambda_r: f64,
    length: f64,
) -> Result<DesignPoint> {
    if !(length > 0.0) {
        return Err(Error::invalid(format!("medium length must be positive, got {length}")));
    }
    let bp = group_slowness(model, lambda_p)?;
    let sigma_s = group_slowness(model, lambda_s)? - bp;
    let sigma_r = group_slowness(model, lambda_r)? - bp;
    if sigma_r == 0.0 {
        return Err(Error::invalid("converted band travels with the pump; m is undefined"));
    }
    let m = sigma_s / sigma_r;
    Ok(DesignPoint {
        lambda_s,
        lambda_p,
        lambda_p2: None,
        lambda_r,
        poling_period: None,
        sigma_s,
        sigma_r,
        m,
        magnification: 1.0 / m.abs(),
        t_max_s: sigma_s.abs() * length,
        t_max_r: sigma_r.abs() * length,
        length,
        feasible: sigma_s * sigma_r < 0.0,
    })
}

/// Sum-frequency design point for a medium of `length` metres.
pub fn design_point(model: &dyn DispersionModel, lambda_s: f64, lambda_p: f64, length: f64) -> Result<DesignPoint> {
    let lambda_r = sfg_idler_wavelength(lambda_s, lambda_p);
    let mut d = assemble(model, lambda_s, lambda_p, lambda_r, length)?;
    d.poling_period = qpm_poling_period(model, lambda_s, lambda_p)?;
    Ok(d)
}

/// Four-wave Bragg-scattering design point. Offsets are measured from the
/// short pump `lambda_p2`; `lambda_p1` is the long pump.
pub fn bragg_scattering_point(
    model: &dyn DispersionModel,
    lambda_s: f64,
    lambda_p1: f64,
    lambda_p2: f64,
    length: f64,
) -> Result<DesignPoint> {
    let lambda_r = bragg_idler_wavelength(lambda_s, lambda_p1, lambda_p2)?;
    // every band has to sit inside the table
    in_range(model, lambda_p1)?;
    let mut d = assemble(model, lambda_s, lambda_p2, lambda_r, length)?;
    d.lambda_p2 = Some(lambda_p1);
    Ok(d)
}

/// Design points for a pump sweep, in input order.
pub fn sweep(model: &dyn DispersionModel, lambda_s: f64, pumps: &[f64], length: f64) -> Result<Vec<DesignPoint>> {
    pumps
        .par_iter()
        .map(|&lp| design_point(model, lambda_s, lp, length))
        .collect()
}

pub const SWEEP_HEADER: [&str; 10] = [
    "lambda_p_nm",
    "lambda_r_nm",
    "poling_period_um",
    "sigma_s_ps_per_m",
    "sigma_r_ps_per_m",
    "m",
    "M",
    "t_max_s_ps",
    "t_max_r_ps",
    "feasible",
];

pub fn write_sweep_csv<W: Write>(points: &[DesignPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| Error::parse("sweep.csv", e.to_string());
    w.write_record(SWEEP_HEADER).map_err(fail)?;
    for d in points {
        w.write_record([
            format!("{}", d.lambda_p),
            format!("{:.12e}", d.lambda_r),
            d.poling_period.map_or(String::new(), |v| format!("{v:.12e}")),
            format!("{:.12e}", d.sigma_s),
            format!("{:.12e}", d.sigma_r),
            format!("{:.12e}", d.m),
            format!("{:.12e}", d.magnification),
            format!("{:.12e}", d.t_max_s),
            format!("{:.12e}", d.t_max_r),
            d.feasible.to_string(),
        ])
        .map_err(fail)?;
    }
    w.flush().map_err(|e| Error::parse("sweep.csv", e.to_string()))?;
    Ok(())
}

pub fn save_sweep_csv(points: &[DesignPoint], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_sweep_csv(points, std::io::BufWriter::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(name: &str) -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
    }

    fn ln() -> Box<dyn DispersionModel> {
        load_model(&data("lithium_niobate_congruent_e.json")).unwrap()
    }

    fn pcf() -> Box<dyn DispersionModel> {
        load_model(&data("pcf_bragg_fiber.json")).unwrap()
    }

    fn constant() -> ConstantIndex {
        ConstantIndex {
            name: "glass".into(),
            index: 1.5,
            range_nm: (300.0, 3000.0),
        }
    }

    /// `β(ω) = a + bω + cω² + dω³`, with closed-form derivatives.
    #[derive(Debug)]
    struct Cubic([f64; 4]);

    impl DispersionModel for Cubic {
        fn name(&self) -> &str {
            "cubic"
        }
        fn valid_range_nm(&self) -> (f64, f64) {
            (400.0, 2000.0)
        }
        fn beta_at(&self, w: f64) -> Result<f64> {
            let [a, b, c, d] = self.0;
            Ok(a + w * (b + w * (c + w * d)))
        }
    }

    #[test]
    fn unit_conversions() {
        assert!((omega_of(1550.0) - 1215.26).abs() < 0.01);
        assert!((wavelength_of(omega_of(812.3)) - 812.3).abs() < 1e-10);
    }

    #[test]
    fn constant_model_is_dispersionless() {
        let m = constant();
        for l in [500.0, 1550.0] {
            assert!((group_slowness(&m, l).unwrap() - 1.5 / SPEED_OF_LIGHT).abs() < 1e-9);
            assert_eq!(gvd(&m, l).unwrap(), 0.0);
        }
        assert_eq!(qpm_poling_period(&m, 1550.0, 775.0).unwrap(), None);
        assert!(beta(&m, 200.0).is_err());
    }

    #[test]
    fn finite_differences_match_polynomial_derivatives() {
        let m = Cubic([3.0e6, 4000.0, 150.0, -20.0]);
        for l in [600.0, 1064.0, 1800.0] {
            let w = omega_of(l);
            let d1 = 4000.0 + 2.0 * 150.0 * w - 3.0 * 20.0 * w * w;
            let d2 = 2.0 * 150.0 - 6.0 * 20.0 * w;
            assert!((group_slowness(&m, l).unwrap() / d1 - 1.0).abs() < 1e-8);
            assert!((gvd(&m, l).unwrap() / d2 - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn lithium_niobate_reference_values() {
        let m = ln();
        let n = Sellmeier::new(
            "ln",
            SellmeierCoefficients {
                wavelength_unit: "um".into(),
                a0: 1.0,
                b: vec![2.9804, 0.5981, 8.9543],
                c: vec![0.02047, 0.0666, 416.08],
            },
            (400.0, 5000.0),
        )
        .unwrap();
        // extraordinary index near 2.138 at 1550 nm
        assert!((n.index(1550.0) - 2.138).abs() < 2e-3);
        // group index about 2.18 at 1550 nm
        let ng = group_slowness(m.as_ref(), 1550.0).unwrap() * SPEED_OF_LIGHT;
        assert!((ng - 2.18).abs() < 0.01, "{ng}");
        // normal dispersion at 1550 nm
        assert!(gvd(m.as_ref(), 1550.0).unwrap() > 0.0);
    }

    #[test]
    fn dense_table_agrees_with_sellmeier() {
        let m = ln();
        let s = Sellmeier::new(
            "ln",
            SellmeierCoefficients {
                wavelength_unit: "um".into(),
                a0: 1.0,
                b: vec![2.9804, 0.5981, 8.9543],
                c: vec![0.02047, 0.0666, 416.08],
            },
            (400.0, 5000.0),
        )
        .unwrap();
        let table = IndexTable::new("ln table", &tabulate_index(&s, 400.0, 2000.0, 0.5), true).unwrap();
        for l in [520.0, 800.0, 1550.0] {
            let a = group_slowness(m.as_ref(), l).unwrap();
            let b = group_slowness(&table, l).unwrap();
            assert!((a / b - 1.0).abs() < 1e-6, "{l}: {a} vs {b}");
        }
    }

    #[test]
    fn idler_arithmetic() {
        assert!((sfg_idler_wavelength(1550.0, 775.0) - 516.6666666667).abs() < 1e-9);
        let r = sfg_idler_wavelength(1550.0, 812.0);
        assert!(((1.0 / 1550.0 + 1.0 / 812.0) * r - 1.0).abs() < 1e-12);
        assert!((sfg_idler_wavelength(1550.0, 1e15) - 1550.0).abs() < 1e-6);
        let lo = sfg_idler_wavelength(1550.0, 700.0);
        let hi = sfg_idler_wavelength(1550.0, 900.0);
        assert!((lo - 482.2).abs() < 0.1 && (hi - 569.4).abs() < 0.1);
        assert!((bragg_idler_wavelength(1692.4, 632.8, 747.5).unwrap() - 1199.96).abs() < 0.01);
        assert_eq!(bragg_idler_wavelength(1550.0, 800.0, 800.0).unwrap(), 1550.0);
        assert!(bragg_idler_wavelength(1550.0, 2000.0, 300.0).is_err());
    }

    #[test]
    fn poling_period_is_symmetric_in_the_inputs() {
        let m = ln();
        let a = qpm_poling_period(m.as_ref(), 1550.0, 800.0).unwrap().unwrap();
        let b = qpm_poling_period(m.as_ref(), 800.0, 1550.0).unwrap().unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn lithium_niobate_sweep() {
        let m = ln();
        let pumps: Vec<f64> = (0..=8).map(|k| 700.0 + 25.0 * k as f64).collect();
        let pts = sweep(m.as_ref(), 1550.0, &pumps, 0.025).unwrap();
        for (d, lp) in pts.iter().zip(&pumps) {
            assert_eq!(d.lambda_p, *lp);
            let lam = d.poling_period.unwrap();
            assert!((5.0..=9.0).contains(&lam), "{d:?}");
            assert!(d.feasible);
            assert!((d.magnification * d.m.abs() - 1.0).abs() <= f64::EPSILON);
            assert!((1.6..=3.6).contains(&d.magnification), "{d:?}");
            assert!(((1.0 / d.lambda_s + 1.0 / d.lambda_p) * d.lambda_r - 1.0).abs() < 1e-9);
        }
        let double = design_point(m.as_ref(), 1550.0, 800.0, 0.05).unwrap();
        assert!((double.t_max_s / pts[4].t_max_s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn feasibility_tracks_the_sign_of_the_offsets() {
        let m = ln();
        for (ls, lp) in [(1550.0, 800.0), (800.0, 1550.0), (1300.0, 1064.0)] {
            let d = design_point(m.as_ref(), ls, lp, 0.01).unwrap();
            assert_eq!(d.feasible, d.sigma_s.signum() != d.sigma_r.signum());
        }
        // pump outside the band between signal and idler
        assert!(!design_point(m.as_ref(), 800.0, 1550.0, 0.01).unwrap().feasible);
    }

    #[test]
    fn fibre_profile_features() {
        let m = pcf();
        let zeros = zero_gvd_wavelengths(m.as_ref(), 600.0, 1700.0, 5.0).unwrap();
        assert_eq!(zeros.len(), 2, "{zeros:?}");
        assert!((zeros[0] - 740.0).abs() < 5.0 && (zeros[1] - 1200.0).abs() < 5.0);
        assert!(matches!(beta(m.as_ref(), 1000.0), Err(Error::Unsupported(_))));
        assert!(matches!(
            qpm_poling_period(m.as_ref(), 1550.0, 800.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn bragg_scattering_example() {
        let m = pcf();
        let d = bragg_scattering_point(m.as_ref(), 1692.4, 632.8, 747.5, 100.0).unwrap();
        assert!(d.feasible);
        assert!((d.t_max_s / 3700.0 - 1.0).abs() < 0.15, "{d:?}");
        assert!((d.t_max_r / 1500.0 - 1.0).abs() < 0.15, "{d:?}");
        assert!((d.magnification / (1.5 / 3.7) - 1.0).abs() < 0.15);
        assert!(bragg_scattering_point(m.as_ref(), 1692.4, 500.0, 747.5, 100.0).is_err());
        let same = bragg_scattering_point(m.as_ref(), 1692.4, 747.5, 747.5, 100.0).unwrap();
        assert!((same.lambda_r - 1692.4).abs() < 1e-9);
        assert!(!same.feasible && (same.m - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coarser_fibre_table_agrees() {
        let rows = read_rows_csv(&data("pcf_bragg_fiber.csv")).unwrap();
        let half: Vec<[f64; 2]> = rows.iter().step_by(2).copied().collect();
        let fine = SlownessTable::new("fine", &rows, true).unwrap();
        let coarse = SlownessTable::new("coarse", &half, true).unwrap();
        let a = bragg_scattering_point(&fine, 1692.4, 632.8, 747.5, 100.0).unwrap();
        let b = bragg_scattering_point(&coarse, 1692.4, 632.8, 747.5, 100.0).unwrap();
        assert!((a.sigma_s / b.sigma_s - 1.0).abs() < 0.01);
        assert!((a.sigma_r / b.sigma_r - 1.0).abs() < 0.01);
    }

    #[test]
    fn material_file_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        std::fs::write(&p, r#"{"material":"x","form":"crystal","valid_range_nm":[400,900],"source":"t"}"#).unwrap();
        assert!(matches!(load_model(&p), Err(Error::Schema(_))));
        std::fs::write(&p, r#"{"material":"x","form":"constant","index":1.4,"valid_range_nm":[400,900],"source":"t","extra":1}"#).unwrap();
        assert!(matches!(load_model(&p), Err(Error::Schema(_))));
        std::fs::write(&p, r#"{"material":"x","form":"table","rows":[[500,1.5],[400,1.6],[600,1.4]],"valid_range_nm":[400,600],"source":"t"}"#).unwrap();
        assert!(load_model(&p).is_err());
        std::fs::write(&p, r#"{"material":"x","form":"constant","index":1.4,"valid_range_nm":[400,900],"source":"t"}"#).unwrap();
        assert_eq!(load_model(&p).unwrap().name(), "x");
        assert!(matches!(load_model(&dir.path().join("none.json")), Err(Error::Io { .. })));
        assert_eq!(ModelRegistry::default().kinds(), vec!["constant", "index_table", "sellmeier", "slowness_table"]);
    }

    #[test]
    fn sweep_csv_layout() {
        let pts = sweep(&constant(), 1550.0, &[700.0, 800.0], 1.0);
        // a dispersionless medium has no walk-off at all
        assert!(pts.is_err());
        let m = ln();
        let pts = sweep(m.as_ref(), 1550.0, &[700.0, 800.0], 0.025).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], SWEEP_HEADER.join(","));
        assert!(lines[1].starts_with("700,") && lines[1].ends_with(",true"));
    }
}
