use std::collections::BTreeMap;
use std::fmt::Debug;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::spline::Interpolant;
use super::{wavelength_of, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

/// A dispersion relation `β(ω)` over a wavelength window.
///
/// Frequencies are angular, in rad/ps; `β` is in 1/m, `β'` in ps/m and
/// `β''` in ps²/m.
pub trait DispersionModel: Debug + Send + Sync {
    fn name(&self) -> &str;
    fn valid_range_nm(&self) -> (f64, f64);

    /// Propagation constant. Implementations need not check the window.
    fn beta_at(&self, omega: f64) -> Result<f64>;

    fn slowness_at(&self, omega: f64) -> Result<f64> {
        ridders(|w| self.beta_at(w), omega, 1e-2 * omega, Order::First)
    }

    fn gvd_at(&self, omega: f64) -> Result<f64> {
        ridders(|w| self.beta_at(w), omega, 2e-2 * omega, Order::Second)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Order {
    First,
    Second,
}

/// Central differences extrapolated to zero step (Ridders' tableau).
pub(crate) fn ridders(f: impl Fn(f64) -> Result<f64>, x: f64, h0: f64, order: Order) -> Result<f64> {
    const NTAB: usize = 10;
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    let diff = |h: f64| -> Result<f64> {
        Ok(match order {
            Order::First => (f(x + h)? - f(x - h)?) / (2.0 * h),
            Order::Second => (f(x + h)? - 2.0 * f(x)? + f(x - h)?) / (h * h),
        })
    };
    let mut a = [[0.0f64; NTAB]; NTAB];
    let mut h = h0;
    a[0][0] = diff(h)?;
    let mut best = a[0][0];
    let mut err = f64::INFINITY;
    for i in 1..NTAB {
        h /= CON;
        a[0][i] = diff(h)?;
        let mut fac = CON2;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON2;
            let e = (a[j][i] - a[j - 1][i]).abs().max((a[j][i] - a[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = a[j][i];
            }
        }
        // higher orders stopped helping
        if (a[i][i] - a[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    if !best.is_finite() {
        return Err(Error::Numerical {
            step: 0,
            reason: format!("finite-difference derivative diverged at omega = {x}"),
        });
    }
    Ok(best)
}

/// Same index at every wavelength.
#[derive(Debug, Clone)]
pub struct ConstantIndex {
    pub name: String,
    pub index: f64,
    pub range_nm: (f64, f64),
}

impl DispersionModel for ConstantIndex {
    fn name(&self) -> &str {
        &self.name
    }

    fn valid_range_nm(&self) -> (f64, f64) {
        self.range_nm
    }

    fn beta_at(&self, omega: f64) -> Result<f64> {
        Ok(self.index * omega / SPEED_OF_LIGHT)
    }

    fn slowness_at(&self, _omega: f64) -> Result<f64> {
        Ok(self.index / SPEED_OF_LIGHT)
    }

    fn gvd_at(&self, _omega: f64) -> Result<f64> {
        Ok(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierCoefficients {
    /// Only micrometres are accepted.
    pub wavelength_unit: String,
    pub a0: f64,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

/// `n² = a0 + Σ b_i λ²/(λ² - c_i)`, `λ` in µm.
#[derive(Debug, Clone)]
pub struct Sellmeier {
    pub name: String,
    pub coefficients: SellmeierCoefficients,
    pub range_nm: (f64, f64),
}

impl Sellmeier {
    pub fn new(name: impl Into<String>, coefficients: SellmeierCoefficients, range_nm: (f64, f64)) -> Result<Self> {
        if coefficients.wavelength_unit != "um" {
            return Err(Error::Schema(format!(
                "Sellmeier wavelength unit must be \"um\", got {:?}",
                coefficients.wavelength_unit
            )));
        }
        if coefficients.b.len() != coefficients.c.len() || coefficients.b.is_empty() {
            return Err(Error::Schema("Sellmeier b and c lists must be non-empty and equally long".into()));
        }
        let m = Self {
            name: name.into(),
            coefficients,
            range_nm,
        };
        for k in 0..=20 {
            let l = range_nm.0 + (range_nm.1 - range_nm.0) * k as f64 / 20.0;
            let n = m.index(l);
            if !(n > 1.0) {
                return Err(Error::invalid(format!("Sellmeier index {n} at {l} nm is not above 1")));
            }
        }
        Ok(m)
    }

    pub fn index(&self, wavelength_nm: f64) -> f64 {
        let l2 = (wavelength_nm * 1e-3).powi(2);
        let c = &self.coefficients;
        let n2 = c.a0 + c.b.iter().zip(&c.c).map(|(b, ci)| b * l2 / (l2 - ci)).sum::<f64>();
        n2.sqrt()
    }
}

impl DispersionModel for Sellmeier {
    fn name(&self) -> &str {
        &self.name
    }

    fn valid_range_nm(&self) -> (f64, f64) {
        self.range_nm
    }

    fn beta_at(&self, omega: f64) -> Result<f64> {
        Ok(self.index(wavelength_of(omega)) * omega / SPEED_OF_LIGHT)
    }
}

/// Refractive index tabulated against wavelength.
#[derive(Debug, Clone)]
pub struct IndexTable {
    pub name: String,
    table: Interpolant,
}

impl IndexTable {
    pub fn new(name: impl Into<String>, rows: &[[f64; 2]], cubic: bool) -> Result<Self> {
        let (x, y): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r[0], r[1])).unzip();
        if let Some(r) = rows.iter().find(|r| !(r[1] > 1.0)) {
            return Err(Error::invalid(format!("tabulated index {} at {} nm is not above 1", r[1], r[0])));
        }
        let table = if cubic {
            Interpolant::cubic(x, y)?
        } else {
            Interpolant::linear(x, y)?
        };
        Ok(Self {
            name: name.into(),
            table,
        })
    }
}

impl DispersionModel for IndexTable {
    fn name(&self) -> &str {
        &self.name
    }

    fn valid_range_nm(&self) -> (f64, f64) {
        self.table.range()
    }

    fn beta_at(&self, omega: f64) -> Result<f64> {
        Ok(self.table.eval(wavelength_of(omega)) * omega / SPEED_OF_LIGHT)
    }
}

/// Group slowness (inverse group velocity) tabulated against wavelength, as
/// published for fibres. `β` itself is not recoverable from such data.
#[derive(Debug, Clone)]
pub struct SlownessTable {
    pub name: String,
    table: Interpolant,
}

impl SlownessTable {
    pub fn new(name: impl Into<String>, rows: &[[f64; 2]], cubic: bool) -> Result<Self> {
        let (x, y): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r[0], r[1])).unzip();
        let table = if cubic {
            Interpolant::cubic(x, y)?
        } else {
            Interpolant::linear(x, y)?
        };
        Ok(Self {
            name: name.into(),
            table,
        })
    }
}

impl DispersionModel for SlownessTable {
    fn name(&self) -> &str {
        &self.name
    }

    fn valid_range_nm(&self) -> (f64, f64) {
        self.table.range()
    }

    fn beta_at(&self, _omega: f64) -> Result<f64> {
        Err(Error::Unsupported(format!(
            "{} tabulates group slowness only; the propagation constant is undefined",
            self.name
        )))
    }

    fn slowness_at(&self, omega: f64) -> Result<f64> {
        Ok(self.table.eval(wavelength_of(omega)))
    }

    fn gvd_at(&self, omega: f64) -> Result<f64> {
        // dβ'/dω = dβ'/dλ · dλ/dω with λ = 2πc/ω
        let l = wavelength_of(omega);
        Ok(self.table.derivative(l) * (-l / omega))
    }
}

/// On-disk material description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialFile {
    pub material: String,
    /// `sellmeier`, `table` or `constant`.
    pub form: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarization: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<SellmeierCoefficients>,
    /// For tables: `refractive_index` (default) or `group_slowness_ps_per_m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<[f64; 2]>>,
    /// CSV path relative to the material file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows_csv: Option<String>,
    /// `linear` or `cubic` (default).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interpolation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<f64>,
    pub valid_range_nm: [f64; 2],
    pub source: String,
}

impl MaterialFile {
    /// Registry key of the model this file describes.
    pub fn model_kind(&self) -> Result<&'static str> {
        match (self.form.as_str(), self.quantity.as_deref()) {
            ("sellmeier", _) => Ok("sellmeier"),
            ("constant", _) => Ok("constant"),
            ("table", None | Some("refractive_index")) => Ok("index_table"),
            ("table", Some("group_slowness_ps_per_m")) => Ok("slowness_table"),
            ("table", Some(q)) => Err(Error::Schema(format!("unknown tabulated quantity `{q}`"))),
            (f, _) => Err(Error::Schema(format!("unknown material form `{f}`"))),
        }
    }

    fn cubic(&self) -> Result<bool> {
        match self.interpolation.as_deref() {
            None | Some("cubic") => Ok(true),
            Some("linear") => Ok(false),
            Some(o) => Err(Error::Schema(format!("unknown interpolation `{o}`"))),
        }
    }

    fn table_rows(&self, base_dir: &Path) -> Result<Vec<[f64; 2]>> {
        match (&self.rows, &self.rows_csv) {
            (Some(r), None) => Ok(r.clone()),
            (None, Some(p)) => read_rows_csv(&base_dir.join(p)),
            _ => Err(Error::Schema("a table needs exactly one of `rows` or `rows_csv`".into())),
        }
    }

    fn range(&self) -> Result<(f64, f64)> {
        let [lo, hi] = self.valid_range_nm;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Schema(format!("invalid valid_range_nm [{lo}, {hi}]")));
        }
        Ok((lo, hi))
    }
}

/// Two-column CSV with a header row; lines starting with `#` are comments.
pub fn read_rows_csv(path: &Path) -> Result<Vec<[f64; 2]>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(file);
    let ctx = path.display().to_string();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(&ctx, e.to_string()))?;
        if rec.len() != 2 {
            return Err(Error::parse(&ctx, format!("row {} has {} columns, expected 2", i + 1, rec.len())));
        }
        let num = |k: usize| {
            rec[k]
                .parse::<f64>()
                .map_err(|e| Error::parse(&ctx, format!("row {}: {e}", i + 1)))
        };
        rows.push([num(0)?, num(1)?]);
    }
    Ok(rows)
}

type Builder = fn(&MaterialFile, &Path) -> Result<Box<dyn DispersionModel>>;

/// Model constructors keyed by kind.
pub struct ModelRegistry {
    builders: BTreeMap<&'static str, Builder>,
}

impl Default for ModelRegistry {
    fn default() -> Self {
        let mut r = Self {
            builders: BTreeMap::new(),
        };
        r.register("sellmeier", |f, _| {
            let c = f
                .coefficients
                .clone()
                .ok_or_else(|| Error::Schema("sellmeier form needs `coefficients`".into()))?;
            Ok(Box::new(Sellmeier::new(&f.material, c, f.range()?)?))
        });
        r.register("index_table", |f, dir| {
            Ok(Box::new(IndexTable::new(&f.material, &f.table_rows(dir)?, f.cubic()?)?))
        });
        r.register("slowness_table", |f, dir| {
            Ok(Box::new(SlownessTable::new(&f.material, &f.table_rows(dir)?, f.cubic()?)?))
        });
        r.register("constant", |f, _| {
            let index = f.index.ok_or_else(|| Error::Schema("constant form needs `index`".into()))?;
            if !(index > 1.0) {
                return Err(Error::invalid(format!("constant index {index} is not above 1")));
            }
            Ok(Box::new(ConstantIndex {
                name: f.material.clone(),
                index,
                range_nm: f.range()?,
            }))
        });
        r
    }
}

impl ModelRegistry {
    pub fn register(&mut self, kind: &'static str, builder: Builder) {
        self.builders.insert(kind, builder);
    }

    pub fn kinds(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    pub fn build(&self, file: &MaterialFile, base_dir: &Path) -> Result<Box<dyn DispersionModel>> {
        let kind = file.model_kind()?;
        let b = self
            .builders
            .get(kind)
            .ok_or_else(|| Error::Schema(format!("no model registered for `{kind}`")))?;
        b(file, base_dir)
    }
}

/// Reads a material JSON file and builds its model.
pub fn load_model(path: &Path) -> Result<Box<dyn DispersionModel>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: MaterialFile =
        serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    ModelRegistry::default().build(&file, dir)
}

/// Samples `n(λ)` of an index model on a uniform wavelength grid.
pub fn tabulate_index(model: &Sellmeier, lo: f64, hi: f64, step: f64) -> Vec<[f64; 2]> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n)
        .map(|k| {
            let l = lo + k as f64 * step;
            [l, model.index(l)]
        })
        .collect()
}
