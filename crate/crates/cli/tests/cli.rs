use std::process::{Command, Output};

use kappa_cli::verify::invariant_names;
use kappa_core::kinematics::{omega_kappa, shell_residual};
use kappa_core::{FourMomentum, KappaContext, Vec3};

fn kappa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kappa"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn dispersion_table_matches_library() {
    let o = kappa(&[
        "dispersion",
        "--kappa",
        "0.7",
        "--m0",
        "0",
        "--grid",
        "11:4",
    ]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(
        header,
        ["k", "omega_kappa", "omega_classical", "shell_residual"]
    );
    assert_eq!(rows.len(), 11);
    assert!(rows[0].iter().all(|v| v.parse::<f64>().unwrap() == 0.0));
    let c = KappaContext::new(0.7, 0.0).unwrap();
    for row in &rows {
        let v: Vec<f64> = row.iter().map(|x| x.parse().unwrap()).collect();
        let k = Vec3::new(v[0], 0.0, 0.0);
        let w = omega_kappa(&k, &c);
        assert_eq!(v[1].to_bits(), w.to_bits());
        assert_eq!(v[2], v[0]);
        assert_eq!(
            v[3].to_bits(),
            shell_residual(&FourMomentum::new(w, k), &c).to_bits()
        );
    }
}

#[test]
fn dispersion_json_carries_schema() {
    let o = kappa(&["dispersion", "--format", "json", "--grid", "2:1"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "dispersion");
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn cluster_sweep_decreases() {
    let o = kappa(&["cluster", "--kappas", "1,4,16"]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["kappa", "metric", "grid_size"]);
    let m: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(m.len(), 3);
    assert!(m[0] > m[1] && m[1] > m[2]);
    assert!(rows.iter().all(|r| r[2] == "8"));
}

#[test]
fn cluster_classical_and_empty() {
    let o = kappa(&["cluster", "--kappas", "1e9"]);
    let (_, rows) = csv_rows(&stdout(&o));
    assert!(rows[0][1].parse::<f64>().unwrap() <= 1e-9);

    let o = kappa(&["cluster", "--kappas", ""]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("usage"));
}

#[test]
fn cluster_grid_errors_surface() {
    // a wide packet on a short range never decays at the edge
    let o = kappa(&["cluster", "--kappas", "1", "--grid", "8:1", "--sigma", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("grid range exceeded"), "{}", stderr(&o));
}

#[test]
fn verify_default_passes_every_invariant_once() {
    let o = kappa(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], 1);
    let names: Vec<&str> = v["result"]["invariants"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, invariant_names());
    assert!(v["result"]["invariants"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["pass"] == true && r["anchor"].as_str().is_some_and(|a| !a.is_empty())));
}

#[test]
fn verify_is_deterministic() {
    let a = kappa(&["verify", "--seed", "42"]);
    let b = kappa(&["verify", "--seed", "42"]);
    assert_eq!(a.stdout, b.stdout);
    let c = kappa(&["verify", "--seed", "43"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn verify_classical_config_passes() {
    let o = kappa(&["verify", "--kappa", "1e9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn corrupted_flip_table_fails_tau_involution() {
    let o = kappa(&["verify", "--flip-table", "corrupted"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("tau involution"));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["failed"], 1);
}

#[test]
fn config_file_and_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("shells.json");
    std::fs::write(
        &cfg,
        "# coupled shells of a+ a\nkinds = a+,a\nkappa = 2\np = 0.3,0,0\nq = 0,0.2,0\n",
    )
    .unwrap();
    let o = kappa(&[
        "solve-shells",
        "--config",
        cfg.to_str().unwrap(),
        "--kappa",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["kappa"], 3.0);
    assert_eq!(v["result"]["kinds"], "a+a");
    assert_eq!(v["result"]["signs"], serde_json::json!([1, 1]));
    assert!(v["result"]["residual"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn config_problems_are_aggregated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "kappa = zero\nmystery = 1\n").unwrap();
    let o = kappa(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--massterm",
        "maybe",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("line 1")
            && err.contains("unknown key `mystery`")
            && err.contains("--massterm"),
        "{err}"
    );
}

#[test]
fn remaining_subcommands_run() {
    for cmd in ["compose", "circ", "flip", "star"] {
        for format in ["json", "csv"] {
            let o = kappa(&[cmd, "--format", format]);
            assert!(o.status.success(), "{cmd} {format}: {}", stderr(&o));
            assert!(!stdout(&o).is_empty());
        }
    }
    let o = kappa(&["star", "--theta", "0,1,0,0,1,0,0,0,0,0,0,0,0,0,0,0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("antisymmetric"));
}
