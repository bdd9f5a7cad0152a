use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decoherence-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

const SMALL_REVIVAL: &str = r#"
units = "scaled"

[grid]
nx = 128
np = 128
x_min = -8.0
x_max = 8.0
p_min = -8.0
p_max = 8.0

[initial]
kind = "gaussian"
x0 = 2.0
p0 = 0.0
sigma_x = 0.7071067811865476
sigma_p = 0.7071067811865476

[evolution]
mass = 1.0
hbar = 1.0
dt = 0.006
t_end = 6.283185307179586
snapshot_stride = 350

[evolution.potential]
coefficients = [0.0, 0.0, 0.5, 0.0, 0.0]
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn timescales_text_reports_a_verdict() {
    let out = lab(&["timescales", "--body", "jupiter", "--model", "env"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("t_q_yr = "), "{text}");
    assert!(text.contains("CLASSICALITY SAFE") || text.to_lowercase().contains("safe"), "{text}");
}

#[test]
fn timescales_json_is_machine_readable() {
    let out = lab(&["--json", "timescales", "--body", "jupiter", "--model", "ggr"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "ClassicalitySafe");
    assert!(v["t_cg_yr"].as_f64().unwrap() < v["t_q_yr"].as_f64().unwrap());
}

#[test]
fn unknown_body_is_a_usage_error() {
    let out = lab(&["timescales", "--body", "pluto"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("pluto"), "{}", stderr(&out));
}

#[test]
fn unknown_model_is_a_usage_error() {
    let out = lab(&["timescales", "--body", "jupiter", "--model", "csl"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn model_outside_its_domain_exits_3() {
    let out = lab(&["timescales", "--body", "jupiter", "--m0", "1e-40"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_decoherence-lab"))
        .env("DECOHERENCE_LAB_THREADS", "zero")
        .args(["catalog", "list"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn catalog_list_shows_builtin_bodies() {
    let out = lab(&["catalog", "list"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for name in ["jupiter", "hyperion", "lab-sphere"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn catalog_override_replaces_builtin_entry() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "extra.toml",
        r#"
[[body]]
name = "jupiter"
mass_g = 2.0e30
volume_cm3 = 1.43e30
temperature_k = 165.0
orbital_speed_cm_per_s = 1.3e6
lyapunov_time_yr = 5.0e6
nonlinearity_scale_cm = 7.8e13
"#,
    );
    let out = lab(&["--catalog", &path, "--json", "catalog", "list"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let bodies: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let jupiters: Vec<_> = bodies.as_array().unwrap().iter().filter(|b| b["name"] == "jupiter").collect();
    assert_eq!(jupiters.len(), 1);
    assert_eq!(jupiters[0]["mass_g"].as_f64(), Some(2.0e30));

    let bad = write(dir.path(), "bad.toml", "[[body]]\nname = \"x\"\n");
    assert_eq!(code(&lab(&["--catalog", &bad, "catalog", "list"])), 2);
}

#[test]
fn table2_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["--out", dir.path().to_str().unwrap(), "table2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("table2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5, "{csv}");
    for model in ["env", "grw", "gpr", "ggr"] {
        assert!(csv.contains(model), "{csv}");
    }
    let m = manifest(dir.path());
    assert_eq!(m["command"], "table2");
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn empty_scenario_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "empty.toml", "");
    let out = lab(&["--out", dir.path().to_str().unwrap(), "evolve", "--scenario", &path]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn evolve_requires_an_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "s.toml", SMALL_REVIVAL);
    let out = lab(&["evolve", "--scenario", &path]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unstable_time_step_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "s.toml", &SMALL_REVIVAL.replace("dt = 0.006", "dt = 0.05"));
    let out = lab(&["--out", dir.path().to_str().unwrap(), "evolve", "--scenario", &path]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("dt"), "{}", stderr(&out));
}

#[test]
fn evolve_is_deterministic_and_records_the_revival() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "s.toml", SMALL_REVIVAL);
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let out_dir = dir.path().join(name);
            let out = lab(&["--out", out_dir.to_str().unwrap(), "evolve", "--scenario", &path]);
            assert_eq!(code(&out), 0, "{}", stderr(&out));
            out_dir
        })
        .collect();

    let m = manifest(&runs[0]);
    let revival = &m["results"]["revival"];
    assert_eq!(revival["pass"], true, "{revival}");
    assert!(revival["l1_error"].as_f64().unwrap() <= 1e-4);
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(outputs.last().unwrap().ends_with("manifest.json"));
    let snapshots = outputs.iter().filter(|o| o.contains("snapshot_")).count();
    assert!(snapshots >= 3);

    let files: Vec<_> = fs::read_dir(&runs[0])
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n.to_string_lossy().starts_with("snapshot_"))
        .collect();
    assert_eq!(files.len(), snapshots);
    for name in files {
        let a = fs::read(runs[0].join(&name)).unwrap();
        let b = fs::read(runs[1].join(&name)).unwrap();
        assert!(a == b, "{name:?} differs between runs");
    }
    let first = fs::read_to_string(runs[0].join("snapshot_00000.csv")).unwrap();
    assert!(first.starts_with("x,p,w\n"));
    assert_eq!(first.lines().count(), 128 * 128 + 1);
    assert_eq!(manifest(&runs[0])["config_hash"], manifest(&runs[1])["config_hash"]);
}

#[test]
fn compare_writes_distance_series() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = SMALL_REVIVAL
        .replace("coefficients = [0.0, 0.0, 0.5, 0.0, 0.0]", "coefficients = [0.0, 0.0, 0.5, 0.0, 0.02]")
        .replace("t_end = 6.283185307179586", "t_end = 1.0")
        .replace("dt = 0.006", "dt = 0.001")
        .replace("x_min = -8.0\nx_max = 8.0", "x_min = -6.0\nx_max = 6.0");
    let path = write(dir.path(), "s.toml", &scenario);
    let out = lab(&["--out", dir.path().to_str().unwrap(), "compare", "--scenario", &path]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("distance.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,l1_distance"));
    let d: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(d[0], 0.0);
    assert!(d.iter().all(|v| v.is_finite() && *v >= 0.0));
    assert!(*d.last().unwrap() > 0.0);
}
