use std::path::PathBuf;

use super::config::ScenarioConfig;
use crate::error::{Error, Result};

const PRESETS: &[(&str, &str)] = &[
    ("fig2a", include_str!("../../presets/fig2a.json")),
    ("fig2b", include_str!("../../presets/fig2b.json")),
    ("fig2c", include_str!("../../presets/fig2c.json")),
    ("fig2d", include_str!("../../presets/fig2d.json")),
    ("fig3", include_str!("../../presets/fig3.json")),
    ("fig4", include_str!("../../presets/fig4.json")),
    ("parity_even", include_str!("../../presets/parity_even.json")),
    ("parity_odd", include_str!("../../presets/parity_odd.json")),
    ("appendixA_ppln", include_str!("../../presets/appendixA_ppln.json")),
    ("appendixA_pcf", include_str!("../../presets/appendixA_pcf.json")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.0).collect()
}

/// Directory that preset-relative data paths resolve against.
pub fn preset_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("presets")
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let text = PRESETS
        .iter()
        .find(|p| p.0 == name)
        .map(|p| p.1)
        .ok_or_else(|| Error::Schema(format!("unknown preset `{name}`; known: {}", preset_names().join(", "))))?;
    ScenarioConfig::from_json(text, name)
}
