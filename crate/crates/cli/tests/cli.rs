//! End-to-end runs of the `twisted-l1` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_twisted-l1"));
    c.env_remove("TWISTED_L1_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-tests").join(name);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, file: &str, body: &str) -> String {
    let p = dir.join(file);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn equilateral_four_points_has_unit_distortion() {
    let dir = scratch("equilateral");
    let metric = dir.join("eq4.json");
    let out = run(&["generate", "equilateral", "--k", "4", "--c", "2.5", "--out", metric.to_str().unwrap()]);
    assert!(out.status.success());
    let out = run(&["c1", metric.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["kind"], "EXACT");
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "c1");
}

#[test]
fn k23_is_not_isometrically_l1() {
    let dir = scratch("k23");
    let rows: Vec<String> = (0..5)
        .map(|i| {
            let row: Vec<&str> = (0..5)
                .map(|j| match (i == j, (i >= 2) == (j >= 2)) {
                    (true, _) => "0",
                    (false, true) => "2",
                    (false, false) => "1",
                })
                .collect();
            format!("[{}]", row.join(","))
        })
        .collect();
    let body = format!(r#"{{"labels":["a","b","c","d","e"],"dist":[{}]}}"#, rows.join(","));
    let path = write(&dir, "k23.json", &body);
    let v = json(&run(&["c1", &path]));
    assert!((v["value"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-9);
    let out = run(&["embed-isometric", &path]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["embeds"], false);
}

#[test]
fn lowerbound_scan_rows_cap_and_determinism() {
    let a = run(&["lowerbound-scan", "--kmax", "4"]);
    assert!(a.status.success());
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "schema_version,k,points,c1,tableau_S,tableau_L");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].ends_with(",,"));
    let b = run(&["lowerbound-scan", "--kmax", "4"]);
    assert_eq!(a.stdout, b.stdout);

    let over = run(&["lowerbound-scan", "--kmax", "9"]);
    assert_eq!(over.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&over.stderr).contains("cap"));
}

#[test]
fn verify_formulas_rejects_empty_grid_and_catches_perturbation() {
    let out = run(&["verify-formulas", "--grid", ""]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["verify-formulas", "--grid", "n=1..3;alpha=0.6,1;r=0.5,2"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["instances"].as_array().unwrap().len(), 12);
    assert_eq!(v["passed"], true);

    let out = run(&["verify-formulas", "--grid", "n=2;alpha=0.75;r=1", "--perturb", "0.001"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert!(v["instances"][0]["formula_witness"].is_string());
}

#[test]
fn assemble_echoes_constants_and_surfaces_preconditions() {
    let dir = scratch("assemble");
    let spec = dir.join("cube.json");
    let out = run(&["generate", "nr-cube", "--n", "3", "--alpha", "0.75", "--r", "2", "--out", spec.to_str().unwrap()]);
    assert!(out.status.success());
    let out = run(&["assemble", spec.to_str().unwrap(), "--theorem", "52"]);
    assert!(out.status.success());
    let v = json(&out);
    let c = v["constants"]["C"].as_f64().unwrap();
    assert_eq!(v["constants"]["C3"].as_f64(), Some(1.0));
    assert!((v["constants"]["C4"].as_f64().unwrap() - (c + 1.0)).abs() < 1e-12);
    assert_eq!(v["theorem"], "52");

    let out = run(&["assemble", spec.to_str().unwrap(), "--theorem", "corollary53"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["routes"].as_array().unwrap().len(), 3);

    // the basepoint must minimize r, and here r(1) = 2 > r(0) = 1
    let body = r#"{"labels":["a","b"],"d0":[[0,1],[1,0]],"d1":[[0,1],[1,0]],"joiner":{"values":[1,2]}}"#;
    let path = write(&dir, "lipschitz.json", body);
    let out = run(&["assemble", &path, "--theorem", "51", "--basepoint", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("precondition") && err.contains("(1, 0)"), "{err}");
    let out = run(&["assemble", &path, "--theorem", "41"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_dir_from_environment() {
    let dir = scratch("outdir");
    let status = bin()
        .env("TWISTED_L1_OUT_DIR", &dir)
        .args(["lowerbound-scan", "--kmax", "3"])
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(dir.join("lowerbound-scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn cap_override_labels_upper_bound() {
    let dir = scratch("cap");
    let metric = dir.join("stable9.json");
    let out = run(&["generate", "stable-union", "--k", "9", "--out", metric.to_str().unwrap()]);
    assert!(out.status.success());
    let refused = run(&["c1", metric.to_str().unwrap()]);
    assert_eq!(refused.status.code(), Some(2));
    let out = run(&["c1", metric.to_str().unwrap(), "--cap-override", "18", "--samples", "512", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["kind"], "UPPER_BOUND_ONLY");
    assert_eq!(v["seed"], 3);
    assert!(v["value"].as_f64().unwrap() >= 1.0);
}
