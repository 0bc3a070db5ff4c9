use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tmreverse::envelope::io::load_envelope_csv;
use tmreverse::scenario::{build_scenario, ScenarioConfig};
use tmreverse::solver::compute_metrics;

fn tmreverse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmreverse")).args(args).output().unwrap()
}

fn run_preset(name: &str, dir: &Path) -> Output {
    let out = tmreverse(&["run", "--preset", name, "--out-dir", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn csvs(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    v.sort();
    v
}

#[test]
fn fig2a_reports_full_conversion() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_preset("fig2a", dir.path());
    let line = String::from_utf8(out.stdout).unwrap();
    assert!(line.starts_with("fig2a [simulate] efficiency="), "{line}");
    let s = summary(dir.path());
    assert!(s["results"]["efficiency"].as_f64().unwrap() >= 0.999);
    let tau = s["results"]["coefficients"]["tau_analytic"].as_f64().unwrap();
    assert!((tau - 0.0034).abs() < 5e-4);
    assert!(s["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn summary_metrics_recompute_from_dumped_fields() {
    let dir = tempfile::tempdir().unwrap();
    run_preset("fig2d", dir.path());
    let cfg = ScenarioConfig::load(&dir.path().join("config.json")).unwrap();
    let mut sc = build_scenario(cfg.simulation().unwrap(), Path::new("."), 1).unwrap();
    let load = |f: &str| load_envelope_csv(&dir.path().join(f)).unwrap();
    sc.s_in = load("s_in.csv");
    sc.r_in = load("r_in.csv");
    let flux: Vec<(f64, f64)> = fs::read_to_string(dir.path().join("flux.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let (z, f) = l.split_once(',').unwrap();
            (z.parse().unwrap(), f.parse().unwrap())
        })
        .collect();
    let m = compute_metrics(&sc, &load("s_out.csv"), &load("r_out.csv"), &flux).unwrap();
    let r = &summary(dir.path())["results"];
    let close = |key: &str, v: f64| {
        let want = r[key].as_f64().unwrap();
        assert!((want - v).abs() <= 1e-9, "{key}: {want} vs {v}");
    };
    close("efficiency", m.efficiency);
    close("transmission", m.transmission);
    close("reversal_fidelity", m.reversal_fidelity.unwrap());
    close("measured_M", m.measured_m.unwrap());
    close("flux_error", m.flux_error);
    assert!((m.measured_m.unwrap() - 0.5).abs() <= 0.01);
}

#[test]
fn reruns_are_byte_identical() {
    for name in ["fig2b", "parity_odd", "appendixA_ppln"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_preset(name, a.path());
        let out = tmreverse(&["run", "--preset", name, "--out-dir", b.path().to_str().unwrap(), "--workers", "3"]);
        assert!(out.status.success());
        let (fa, fb) = (csvs(a.path()), csvs(b.path()));
        assert!(!fa.is_empty());
        assert_eq!(fa.len(), fb.len());
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{name}: {}", x.display());
        }
    }
}

#[test]
fn zero_coupling_config_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let text = String::from_utf8(tmreverse(&["preset", "fig2a"]).stdout).unwrap();
    let text = text.replacen("\"gamma\": 12.0", "\"gamma\": 0.0", 1);
    let path = dir.path().join("off.json");
    fs::write(&path, text).unwrap();
    let out_dir = dir.path().join("out");
    let out = tmreverse(&["simulate", "--config", path.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(summary(&out_dir)["results"]["efficiency"].as_f64().unwrap(), 0.0);
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(tmreverse(&["run", "--preset", "fig9"]).status.code(), Some(2));
    assert_eq!(tmreverse(&["parity", "--preset", "fig2a"]).status.code(), Some(2));
    assert_eq!(tmreverse(&["run", "--config", "/nonexistent/cfg.json"]).status.code(), Some(4));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"schema_version": 1, "name": "x", "mode": "simulate", "oops": 1}"#).unwrap();
    assert_eq!(tmreverse(&["run", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    // a signal placed too close to the window edge overflows the mapped image
    let text = String::from_utf8(tmreverse(&["preset", "fig4"]).stdout).unwrap();
    let cramped = dir.path().join("cramped.json");
    fs::write(&cramped, text.replacen("\"span\": 64.0", "\"span\": 32.0", 1).replacen("\"samples\": 8192", "\"samples\": 4096", 1)).unwrap();
    assert_eq!(tmreverse(&["run", "--config", cramped.to_str().unwrap()]).status.code(), Some(3));
    let listed = String::from_utf8(tmreverse(&["presets"]).stdout).unwrap();
    assert_eq!(listed.lines().count(), 10);
}

#[test]
fn design_preset_resolves_material_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = tmreverse(&["design", "--preset", "appendixA_pcf", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 2);
}
