//! End-to-end runs of the `nhse` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nhse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhse")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const HN_OBC: &str = r#"{"family":"hn","t":1.0,"gamma":0.5,"sites":8,"boundary":"obc"}"#;
const HN_PBC: &str = r#"{"family":"hn","t":1.0,"gamma":0.5,"sites":8,"boundary":"pbc"}"#;

#[test]
fn spectrum_to_stdout_and_vector_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "hn.json", HN_OBC);
    let bin = dir.path().join("vecs.bin");
    let out = nhse(&["spectrum", "--model", &model, "--vectors", bin.to_str().unwrap()]);
    let v = stdout_json(&out);
    let values = v["eigenvalues"].as_array().unwrap();
    assert_eq!(values.len(), 8);
    // open Hatano-Nelson chain: 2 sqrt(t^2 - gamma^2) cos(pi k / (L + 1))
    let mut re: Vec<f64> = values.iter().map(|z| z[0].as_f64().unwrap()).collect();
    re.sort_by(f64::total_cmp);
    let mut want: Vec<f64> = (1..=8).map(|k| 2.0 * 0.75f64.sqrt() * (std::f64::consts::PI * k as f64 / 9.0).cos()).collect();
    want.sort_by(f64::total_cmp);
    for (a, b) in re.iter().zip(&want) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    assert!(values.iter().all(|z| z[1].as_f64().unwrap().abs() < 1e-12));
    assert_eq!(v["eigenvectors"].as_array().unwrap().len(), 8);
    assert!(v["residual_max"].as_f64().unwrap() < 1e-10);
    let bytes = fs::read(&bin).unwrap();
    let header: Value = serde_json::from_slice(&bytes[..bytes.iter().position(|&b| b == b'\n').unwrap()]).unwrap();
    assert_eq!(header["dimension"], 8);
    assert_eq!(header["count"], 8);
}

#[test]
fn classify_beta_and_critical() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "hn.json", HN_OBC);
    let c = stdout_json(&nhse(&["classify", "--model", &model]));
    assert_eq!(c, serde_json::json!({"class": "real", "degenerate": false, "first_mixed_bond": null}));

    let b = stdout_json(&nhse(&["beta", "--model", &model]));
    assert!((b["r"].as_f64().unwrap() - (0.5f64 / 1.5).sqrt()).abs() < 1e-14);
    assert_eq!(b["side"], "left");

    let dimer = write(
        dir.path(),
        "dimer.json",
        r#"{"family":"mosaic_dimer","u":-0.5,"v":1.0,"gamma":0.3,"kappa":1,"cells":10,"boundary":"obc"}"#,
    );
    let csv_path = dir.path().join("curves.csv");
    let out = nhse(&["critical", "--model", &dimer, "--samples", "51", "--out", csv_path.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("curve,segment,param1,param2"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.rsplitn(4, ',').collect()).collect();
    assert!(rows.iter().any(|r| r[3].contains("u=-v")));
    // every point of the hyperbola satisfies u v + gamma^2 = 0 with v = 1
    for r in rows.iter().filter(|r| r[3].contains("gamma^2/v")) {
        let (u, g): (f64, f64) = (r[1].parse().unwrap(), r[0].parse().unwrap());
        assert!((u + g * g).abs() < 1e-12);
    }
}

#[test]
fn winding_explicit_and_automatic_reference() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "hn.json", HN_PBC);
    let w = stdout_json(&nhse(&["winding", "--model", &model, "--e0", "0,0", "--nk", "128"]));
    assert_eq!(w["winding"].as_i64().unwrap().abs(), 1);
    let auto = stdout_json(&nhse(&["winding", "--model", &model]));
    assert_eq!(auto["winding"], w["winding"]);
    let outside = stdout_json(&nhse(&["winding", "--model", &model, "--e0", "-5,0.5"]));
    assert_eq!(outside["winding"], 0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let pbc = write(dir.path(), "hn.json", HN_PBC);
    assert_eq!(nhse(&[]).status.code(), Some(1));
    assert_eq!(nhse(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(nhse(&["--help"]).status.code(), Some(0));
    assert_eq!(nhse(&["--version"]).status.code(), Some(0));
    assert_eq!(nhse(&["spectrum", "--model", "/nonexistent.json"]).status.code(), Some(1));
    assert_eq!(nhse(&["winding", "--model", &pbc, "--e0", "oops"]).status.code(), Some(1));
    assert_eq!(nhse(&["spectrum", "--model", &pbc, "--tol", "-1"]).status.code(), Some(1));
    // classification needs open ends
    assert_eq!(nhse(&["classify", "--model", &pbc]).status.code(), Some(1));
    // a reference energy on the band is a numerical failure
    let on_band = nhse(&["winding", "--model", &pbc, "--e0", "2,0"]);
    assert_eq!(on_band.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&on_band.stderr).contains("periodic spectrum"));
    let bad = write(dir.path(), "bad.json", r#"{"family":"mosaic_dimer","u":1,"v":1,"gamma":0,"kappa":3,"cells":2,"boundary":"pbc"}"#);
    assert_eq!(nhse(&["spectrum", "--model", &bad]).status.code(), Some(1));
}

#[test]
fn sweep_csv_and_json_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"template":{"family":"mosaic_dimer","u":-0.5,"v":1.0,"gamma":0.0,"kappa":2,"cells":10,"boundary":"obc"},
            "axis1":{"param":"u","min":-2.0,"max":2.0,"n":5},
            "axis2":{"param":"gamma","min":-1.5,"max":1.5,"n":4},
            "L":20}"#,
    );
    let csv = dir.path().join("pd.csv");
    let json = dir.path().join("pd.json");
    for (path, threads) in [(&csv, "1"), (&json, "2")] {
        let out = nhse(&["sweep", "--config", &cfg, "--out", path.to_str().unwrap(), "--threads", threads]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 21);
    assert_eq!(text.lines().next().unwrap(), "axis1_value,axis2_value,dmipr,class,r,winding");
    let pd: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let cells: Vec<&Value> = pd["cells"].as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap()).collect();
    for (line, cell) in text.lines().skip(1).zip(cells) {
        let fields: Vec<&str> = line.split(',').collect();
        match cell["dmipr"].as_f64() {
            Some(d) => assert_eq!(fields[2].parse::<f64>().unwrap(), d),
            None => assert_eq!(fields[2], ""),
        }
        assert_eq!(fields[3], cell["class"].as_str().unwrap_or(""));
    }
    assert_eq!(nhse(&["sweep", "--config", "/nonexistent.json"]).status.code(), Some(1));
}

#[test]
fn verify_subset_reports_lines() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = nhse(&["verify", "--criterion", "1", "--criterion", "3", "--seed", "7", "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("[PASS] 1."));
    assert!(lines[1].starts_with("[PASS] 3."));
    let saved: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(saved.as_array().unwrap().len(), 2);
    assert_eq!(nhse(&["verify", "--criterion", "9"]).status.code(), Some(1));
}
