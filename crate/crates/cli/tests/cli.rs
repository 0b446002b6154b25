use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qsr(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qsr"));
    cmd.args(args).arg("--out").arg(dir).env_clear();
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn qsr")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = qsr(dir, args, &[]);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join(name)).unwrap()).unwrap()
}

fn csv_rows(dir: &Path, name: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(dir.join(name)).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn coeffs_report() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["coeffs"]);
    let r = report(dir.path(), "coeffs.json");
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["config"]["cutoff.lambda"], "4.0");
    let re_d1 = r["results"]["re_d1"].as_f64().unwrap();
    assert!((re_d1 - 8.0 * (-0.5f64).exp() / (3.0 * std::f64::consts::PI)).abs() < 1e-9);
    assert!(r["results"]["re_d0"].as_f64().unwrap().abs() < 1e-8);
    for d in r["results"]["d"].as_array().unwrap() {
        assert!(d["difference"].as_f64().unwrap() < 1e-4);
    }
    let (header, rows) = csv_rows(dir.path(), "u.csv");
    assert_eq!(header, ["t", "re_u", "im_u", "abs_u"]);
    assert_eq!(rows.len(), 101);
    assert!(dir.path().join("u.svg").exists());
}

#[test]
fn invalid_cutoff_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    for lam in ["0", "-2"] {
        let set = format!("cutoff.lambda={lam}");
        let out = qsr(dir.path(), &["coeffs", "--set", &set], &[]);
        assert_eq!(out.status.code(), Some(2));
        let rec: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(rec["error"]["kind"], "config");
        assert!(rec["error"]["message"].as_str().unwrap().contains("invalid cutoff"));
    }
    let out = qsr(dir.path(), &["coeffs", "--set", "no.such=1"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.cfg");
    std::fs::write(&file, "# run\nbeta = 1.0\ntimes.n_points = 5\ng = 0.3\n").unwrap();
    let out = qsr(
        dir.path(),
        &["evolve", "--config", file.to_str().unwrap()],
        &[("QSR_TIMES__T_MAX", "2.0"), ("QSR_G", "0.2")],
    );
    assert!(out.status.success());
    let r = report(dir.path(), "evolve.json");
    assert_eq!(r["config"]["times.t_max"], "2.0");
    assert_eq!(r["config"]["g"], "0.2");
    let (_, rows) = csv_rows(dir.path(), "evolve.csv");
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[4][0], 2.0);
    let bad = qsr(dir.path(), &["evolve"], &[("QSR_NOT_A_KEY", "1")]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn spectrum_default_and_injected() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["spectrum"]);
    let r = report(dir.path(), "spectrum.json");
    assert_eq!(r["results"]["zero_multiplicity"], 1);
    assert!(r["results"]["closed_form_residual"].as_f64().unwrap() < 1e-10);
    assert!(r["results"]["cp_certification"].as_array().unwrap().iter().all(|c| c["passed"] == true));

    let inj = tempfile::tempdir().unwrap();
    ok(inj.path(), &["spectrum", "--inject-d", "0,-0.66,0,-0.34,0,-0.2"]);
    let r = report(inj.path(), "spectrum.json");
    assert_eq!(r["results"]["injected"], true);
    let re = r["results"]["real_parts"].as_array().unwrap();
    assert_eq!(re.len(), 4);
    assert!(re.iter().all(|v| v.as_f64().unwrap().abs() < 1e-12));
}

#[test]
fn evolve_relaxes_towards_spin_down() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["evolve", "--set", "times.t_max=600", "--set", "times.n_points=301"]);
    let (header, rows) = csv_rows(dir.path(), "evolve.csv");
    assert_eq!(header, ["t", "sx", "sy", "sz"]);
    assert!(rows.windows(2).all(|w| w[1][3] < w[0][3]));
    assert!(rows.last().unwrap()[3] < -0.99);
}

#[test]
fn free_evolution_stays_on_larmor_circle() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["evolve", "--set", "g=0", "--set", "evolve.initial=plus_x", "--format", "csv"]);
    let (_, rows) = csv_rows(dir.path(), "evolve.csv");
    for r in &rows {
        assert!((r[1] * r[1] + r[2] * r[2] - 1.0).abs() < 1e-9);
    }
    assert!(!dir.path().join("evolve.json").exists());
    assert!(!dir.path().join("evolve.svg").exists());
}

#[test]
fn single_point_grid_returns_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["evolve", "--set", "times.n_points=1", "--set", "evolve.initial=0.6,0,0,0.8"]);
    let (_, rows) = csv_rows(dir.path(), "evolve.csv");
    assert_eq!(rows.len(), 1);
    // Bloch vector of (0.6, 0.8i): (0, 0.96, -0.28)
    let want = [0.0, 0.0, 0.96, -0.28];
    for (a, b) in rows[0].iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn evolve_observable_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["evolve", "--set", "evolve.observable=plus", "--set", "g=0", "--set", "times.n_points=3"]);
    let (header, rows) = csv_rows(dir.path(), "evolve.csv");
    assert_eq!(header.len(), 9);
    for r in &rows {
        // e^{2it}: only the σ(1) coefficient is nonzero
        assert!((r[3] - (2.0 * r[0]).cos()).abs() < 1e-12 && (r[4] - (2.0 * r[0]).sin()).abs() < 1e-12);
        assert!(r[1].abs() + r[5].abs() + r[7].abs() < 1e-12);
    }
}

const SMALL: [&str; 4] = ["--set", "bath.n_modes=60", "--set", "oracle.grid_step=0.5"];

#[test]
fn oracle_compare_scaling_at_small_scale() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["oracle-compare"];
    args.extend(SMALL);
    let out = ok(dir.path(), &args);
    assert!(String::from_utf8_lossy(&out.stdout).contains("oracle-compare: conclusive"));
    let r = report(dir.path(), "oracle.json");
    assert_eq!(r["status"], "conclusive");
    let ratio = r["results"]["ratio_consistency"].as_f64().unwrap();
    assert!((0.5..=2.0).contains(&ratio), "{ratio}");
    assert!(r["results"]["window"].as_f64().unwrap() < r["results"]["recurrence_time"].as_f64().unwrap());
    let (header, rows) = csv_rows(dir.path(), "oracle_traces.csv");
    assert_eq!(header, ["t", "e_g0.2", "e_g0.1", "e_g0.05"]);
    assert_eq!(rows[0][0], 0.0);
    assert!(dir.path().join("oracle.svg").exists());
}

#[test]
fn oracle_compare_identity_sits_below_floor() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["oracle-compare", "--set", "oracle.observable=identity", "--set", "oracle.window=8"];
    args.extend(SMALL);
    ok(dir.path(), &args);
    let r = report(dir.path(), "oracle.json");
    for row in r["results"]["table"].as_array().unwrap() {
        assert_eq!(row["below_floor"], true);
    }
}

#[test]
fn oracle_compare_without_photons_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["oracle-compare", "--set", "oracle.excitation_cap=0"];
    args.extend(SMALL);
    let out = qsr(dir.path(), &args, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(dir.path(), "oracle.json")["status"], "inconclusive");
}

#[test]
fn oracle_window_beyond_recurrence_fails_numerically() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["oracle-compare", "--set", "oracle.window=500"];
    args.extend(SMALL);
    let out = qsr(dir.path(), &args, &[]);
    assert_eq!(out.status.code(), Some(1));
    let rec: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(rec["error"]["kind"], "numerical");
}

#[test]
fn sweep_over_modes_refines_the_kernel() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["sweep", "--axis", "n_modes", "--values", "50,100,200"]);
    let (header, rows) = csv_rows(dir.path(), "sweep.csv");
    assert_eq!(header, ["n_modes", "kernel_error"]);
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), [50.0, 100.0, 200.0]);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
}

#[test]
fn sweep_over_cap_changes_error_little() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "sweep", "--axis", "excitation_cap", "--values", "1,2", "--set", "sweep.watch=error", "--set", "g=0.05", "--set",
            "bath.n_modes=40",
        ],
    );
    let (header, rows) = csv_rows(dir.path(), "sweep.csv");
    assert_eq!(header[2], "e_g0.05");
    let (e1, e2) = (rows[0][2], rows[1][2]);
    assert!((e1 - e2).abs() < 0.2 * e2, "{e1} vs {e2}");
}

#[test]
fn sweep_needs_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsr(dir.path(), &["sweep", "--values", ""], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["oracle-compare", "--seed", "7", "--set", "bath.n_modes=20", "--set", "oracle.window=6"];
    ok(a.path(), &args);
    let mut with_threads = args.to_vec();
    with_threads.extend(["--threads", "1"]);
    ok(b.path(), &with_threads);
    for name in ["oracle.json", "oracle_traces.csv", "oracle.svg"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        if name == "oracle.json" {
            // the output directory itself is part of the embedded config
            let strip = |v: &[u8]| {
                let mut j: Value = serde_json::from_slice(v).unwrap();
                j["config"]["output.directory"] = Value::Null;
                j
            };
            assert_eq!(strip(&x), strip(&y));
            assert_eq!(strip(&x)["config"]["seed"], "7");
        } else {
            assert_eq!(x, y, "{name}");
        }
    }
}
