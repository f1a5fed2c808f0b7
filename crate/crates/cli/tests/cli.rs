use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tweezer-sta"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn error_json(out: &Output) -> Value {
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(str::to_string).collect()).collect();
    (header, rows)
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

fn assert_manifest_matches(dir: &Path) {
    let m = manifest(dir);
    let listed = m["files"].as_array().unwrap();
    let on_disk = files(dir);
    assert_eq!(listed.len() + 1, on_disk.len(), "every file but the manifest is listed");
    for f in listed {
        let bytes = &on_disk[f["name"].as_str().unwrap()];
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(bytes)));
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
}

#[test]
fn unknown_key_is_a_config_error_with_its_position() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", "[fig1]\nl = \"12.6 um\"\nduration = \"1 us\"\n");
    let out = run(&["run", "fig1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_json(&out);
    assert_eq!(e["error"], "config");
    assert_eq!(e["line"], 3);
    assert!(e["message"].as_str().unwrap().contains("duration"));
}

#[test]
fn missing_unit_names_the_key() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", "[fig4a]\nradius = 25.2\n");
    let e = error_json(&run(&["run", "fig4a", "--config", cfg.to_str().unwrap()]));
    assert_eq!(e["error"], "config");
    assert_eq!(e["key"], "fig4a.radius");
}

#[test]
fn mismatched_scenario_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", "scenario = \"fig5\"\n");
    let e = error_json(&run(&["run", "fig1", "--config", cfg.to_str().unwrap()]));
    assert_eq!(e["key"], "scenario");
}

#[test]
fn fig1_writes_its_file_contract() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("f1");
    ok(&["run", "fig1", "--samples", "40", "--out", out.to_str().unwrap()]);
    let names: Vec<String> = files(&out).into_keys().collect();
    assert_eq!(names, ["fits.json", "manifest.json", "survival_cv.csv", "survival_sta.csv"]);
    let (header, rows) = read_csv(&out.join("survival_sta.csv"));
    assert_eq!(header, ["e_c_over_u", "e_c", "survival", "ci_low", "ci_high"]);
    assert!(!rows.is_empty());
    let fits: Value = serde_json::from_slice(&fs::read(out.join("fits.json")).unwrap()).unwrap();
    for k in ["sta", "cv"] {
        let p = fits[k]["p_success"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&p));
        assert_eq!(fits[k]["n_samples"], 40);
    }
    assert!(fits["cv_piecewise"]["fit"]["plateau"].is_number());
    assert_manifest_matches(&out);
    let m = manifest(&out);
    assert_eq!(m["scenario"], "fig1");
    assert_eq!(m["seed"], 1);
    assert_eq!(m["config"]["ensemble"]["samples"], 40);
    assert!(m["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn coarse_fig2_grid_stays_in_range() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "[ensemble]\nsamples = 12\n\n[fig2]\nt_min = \"30 us\"\nt_max = \"120 us\"\nt_points = 4\n\
         l_min = \"5 um\"\nl_max = \"80 um\"\nl_points = 4\ncut_points = 3\nboundary = false\n",
    );
    let out = tmp.path().join("f2");
    ok(&["run", "fig2", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let (header, rows) = read_csv(&out.join("sweep.csv"));
    assert_eq!(header, ["t_f", "l", "p", "ci_low", "ci_high"]);
    assert_eq!(rows.len(), 16);
    for r in &rows {
        let p: f64 = r[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&p), "{r:?}");
    }
    let (_, cuts) = read_csv(&out.join("cuts.csv"));
    assert_eq!(cuts.len(), 3 * 3);
    assert!(!out.join("boundary.json").exists());
    assert_manifest_matches(&out);
}

#[test]
fn sweep_verb_writes_only_the_grid() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", "[fig2]\nt_points = 2\nl_points = 3\n");
    let out = tmp.path().join("s");
    ok(&["sweep", "--config", cfg.to_str().unwrap(), "--samples", "8", "--out", out.to_str().unwrap()]);
    let names: Vec<String> = files(&out).into_keys().collect();
    assert_eq!(names, ["manifest.json", "sweep.csv", "sweep.json"]);
    let map: Value = serde_json::from_slice(&fs::read(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(map["p"].as_array().unwrap().len(), 2);
    assert_eq!(map["p"][0].as_array().unwrap().len(), 3);
}

#[test]
fn scaling_table_lists_the_distance_limits() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("st");
    ok(&["scaling-table", "--out", out.to_str().unwrap()]);
    let (header, rows) = read_csv(&out.join("scaling_table.csv"));
    assert_eq!(header, ["t_f", "kind", "l_max", "delta_n_final", "delta_n_max"]);
    let at = |t: f64, kind: &str| -> f64 {
        rows.iter()
            .find(|r| (r[0].parse::<f64>().unwrap() - t).abs() < 1e-12 && r[1] == kind)
            .unwrap()[2]
            .parse()
            .unwrap()
    };
    // With ω² = 2U0/(md²): CV end kick ½mv² reaches U0, CJ peak offset 6√3·l/(ω²t_f²)
    // reaches d, STA peak offset 10l/(√3ω²t_f²) reaches d.
    let p = tweezer_sta::model::TrapParams::nominal();
    let a = p.depth() / (p.mass() * p.width());
    for (kind, expect) in [
        ("CV", (2.0 * p.depth() / p.mass()).sqrt() * 1e-3),
        ("CJ", a * 1e-6 / 27f64.sqrt()),
        ("STA", 3f64.sqrt() / 5.0 * a * 1e-6),
    ] {
        assert!((at(1e-3, kind) / expect - 1.0).abs() < 1e-9, "{kind}");
    }
    assert!((at(1e-3, "CV") / 391e-6 - 1.0).abs() < 0.01);
    assert!((at(1e-3, "CJ") / 20.2e-3 - 1.0).abs() < 0.01);
    assert!((at(1e-3, "STA") / 36.3e-3 - 1.0).abs() < 0.01);
    assert_manifest_matches(&out);
}

#[test]
fn fig3_path_file_validates_with_margins() {
    let out = ok(&["validate", data("fig3_path.toml").to_str().unwrap()]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["valid"], true);
    assert_eq!(report["segments"].as_array().unwrap().len(), 3);
    assert_eq!(report["junctions"].as_array().unwrap().len(), 2);
    for s in report["segments"].as_array().unwrap() {
        let margin = s["harmonic_margin"].as_f64().unwrap();
        assert!(margin > 0.0 && margin < 1.0);
        assert!(s["thermal_margin"].is_number());
    }
    assert!(report["max_tweezer_speed"].as_f64().unwrap() < report["slew_limit"].as_f64().unwrap());
}

#[test]
fn s_shape_file_validates() {
    let out = ok(&["validate", data("s_shape_path.toml").to_str().unwrap()]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["valid"], true);
    let j = &report["junctions"][0];
    assert!(j["tangent_angle"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn speed_jump_reports_the_junction() {
    let tmp = TempDir::new().unwrap();
    let file = write(
        tmp.path(),
        "p.toml",
        "[[segment]]\nkind = \"sta\"\nlength = \"10 um\"\nt_f = \"40 us\"\n\n\
         [[segment]]\nkind = \"sta\"\nlength = \"10 um\"\nt_f = \"40 us\"\nv_f = \"0.2 m/s\"\n\n\
         [[segment]]\nkind = \"sta\"\nlength = \"10 um\"\nt_f = \"40 us\"\nv_i = \"0.3 m/s\"\n",
    );
    let out = run(&["validate", file.to_str().unwrap()]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["valid"], false);
    assert_eq!(report["error_junction"], 1);
    let e = error_json(&out);
    assert_eq!(e["error"], "junction_mismatch");
    assert_eq!(e["junction"], 1);
}

#[test]
fn long_segment_warns_but_is_reported() {
    let tmp = TempDir::new().unwrap();
    let p = tweezer_sta::model::TrapParams::nominal();
    let t_f: f64 = 40e-6;
    let limit = 3f64.sqrt() / 5.0 * p.depth() / (p.mass() * p.width()) * t_f * t_f;
    let file = write(
        tmp.path(),
        "p.toml",
        &format!("[[segment]]\nkind = \"sta\"\nlength = \"{} um\"\nt_f = \"40 us\"\n", 1.2 * limit * 1e6),
    );
    let out = ok(&["validate", file.to_str().unwrap()]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["valid"], true);
    assert!((report["segments"][0]["harmonic_margin"].as_f64().unwrap() + 0.2).abs() < 1e-9);
    let warnings = report["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("exceeds the harmonic-trap boundary")));
}

#[test]
fn path_file_errors_carry_line_and_column() {
    let tmp = TempDir::new().unwrap();
    let file = write(tmp.path(), "p.toml", "[[segment]]\nkind = \"sta\"\nt_f = \"40 us\"\nlength = 3\n");
    let e = error_json(&run(&["validate", file.to_str().unwrap()]));
    assert_eq!(e["error"], "path_file");
    assert_eq!(e["line"], 4);
    assert!(e["column"].as_u64().unwrap() >= 1);
}

#[test]
fn fig3_config_resolves_its_path_file() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("f3");
    ok(&["run", "fig3", "--config", data("fig3.toml").to_str().unwrap(), "--samples", "16", "--out", out.to_str().unwrap()]);
    let names: Vec<String> = files(&out).into_keys().collect();
    assert_eq!(names, ["manifest.json", "path.csv", "path_report.json", "result.json", "survival.csv"]);
    let report: Value = serde_json::from_slice(&fs::read(out.join("path_report.json")).unwrap()).unwrap();
    assert_eq!(report["valid"], true);
    assert_manifest_matches(&out);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_workers() {
    let tmp = TempDir::new().unwrap();
    let dirs: Vec<PathBuf> = ["a", "b", "c"].iter().map(|d| tmp.path().join(d)).collect();
    for (dir, workers) in dirs.iter().zip(["1", "3", "3"]) {
        ok(&["run", "fig4b", "--samples", "24", "--seed", "7", "--workers", workers, "--out", dir.to_str().unwrap()]);
    }
    let strip = |dir: &Path| {
        let mut f = files(dir);
        f.remove("manifest.json");
        f
    };
    let reference = strip(&dirs[0]);
    assert_eq!(reference.len(), 3);
    for d in &dirs[1..] {
        assert_eq!(strip(d), reference);
        assert_eq!(manifest(d)["files"], manifest(&dirs[0])["files"]);
        let config = |dir: &Path| {
            let mut c = manifest(dir)["config"].clone();
            c.as_object_mut().unwrap().remove("out");
            c
        };
        assert_eq!(config(d), config(&dirs[0]));
    }
    assert_eq!(manifest(&dirs[0])["seed"], 7);
}

#[test]
fn manifest_config_reproduces_the_run() {
    let tmp = TempDir::new().unwrap();
    let first = tmp.path().join("first");
    ok(&["run", "fig4a", "--samples", "16", "--seed", "5", "--out", first.to_str().unwrap()]);
    // Feed the echoed config back as a config file.
    let echoed = manifest(&first)["config"].clone();
    let mut cfg: tweezer_sta_cli::config::Config = serde_json::from_value(echoed).unwrap();
    let second = tmp.path().join("second");
    cfg.out = Some(second.clone());
    let path = write(tmp.path(), "echo.toml", &toml::to_string(&cfg).unwrap());
    ok(&["run", "fig4a", "--config", path.to_str().unwrap()]);
    assert_eq!(manifest(&second)["files"], manifest(&first)["files"]);
}

#[test]
fn zero_workers_is_a_usage_error() {
    let e = error_json(&run(&["scaling-table", "--workers", "0", "--out", "/nonexistent/never"]));
    assert_eq!(e["error"], "usage");
}
