use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const ID2: &str = r#"{"din": 2, "dout": 2, "kind": "unitary", "data": [[1, 0], [0, 1]]}"#;

fn athermal(args: &[&str], job: &Path, envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_athermal"));
    cmd.args(args).arg("--job").arg(job).env_remove("ATHERMAL_OUT");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_job(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn csv_values(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (cols[0].parse().unwrap(), cols[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn identity_qubit_free_energy_and_cost() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(dir.path(), "id2.json", &format!(r#"{{"channel": {ID2}, "beta": 1.0}}"#));
    // Oracle: golden unit of dimension d has D = ln d², and the cost halves it.
    let golden = (4.0f64).ln();

    let out = athermal(&["free-energy", "--format", "csv"], &job, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_values(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 1);
    assert!((rows[0].1 - golden).abs() <= 1e-5, "{}", rows[0].1);

    let out = athermal(&["cost", "--format", "csv", "--eps", "0"], &job, &[]);
    assert!(out.status.success());
    let rows = csv_values(&String::from_utf8(out.stdout).unwrap());
    assert!((rows[0].1 - golden / 2.0).abs() <= 1e-6, "{}", rows[0].1);
}

#[test]
fn verify_thermal_channel_passes() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "thermal.json",
        r#"{"channel": {"din": 2, "dout": 2, "kind": "thermal", "hamiltonian": [[0, 0], [0, 1]], "beta": 1.0},
            "beta": 1.0, "optimizer": {"restarts": 8}}"#,
    );
    let out = athermal(&["verify"], &job, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let d = &v["rows"][0]["diagnostics"];
    assert_eq!(d["checks_failed"], 0);
    assert!(d["checks_total"].as_u64().unwrap() > 0);
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "job.json",
        r#"{"channel": {"din": 2, "dout": 2, "kind": "kraus",
              "data": [[[0.8, 0], [0, 0]], [[0, 0], [0, 0.8]], [[0, 0.6], [0, 0]], [[0, 0], [0.6, 0]]]},
            "beta_sweep": {"start": 0.5, "stop": 1.5, "steps": 3}, "optimizer": {"restarts": 4}}"#,
    );
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = athermal(&["work", "--out", p.to_str().unwrap()], &job, &[]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn sweep_rows_and_formats_agree() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "sweep.json",
        &format!(r#"{{"channel": {ID2}, "output": {{"path": "fe.csv", "format": "csv"}}}}"#),
    );
    let sweep = ["--beta-sweep", "0.1:2.0:20"];
    let csv = athermal(&[&["cost"][..], &sweep].concat(), &job, &[("ATHERMAL_OUT", dir.path())]);
    assert!(csv.status.success(), "{}", String::from_utf8_lossy(&csv.stderr));
    let csv_text = std::fs::read_to_string(dir.path().join("fe.csv")).unwrap();
    assert_eq!(csv_text.lines().next().unwrap(), "beta,quantity,value,converged,restarts_used,runtime_ms");
    let rows = csv_values(&csv_text);
    assert_eq!(rows.len(), 20);
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));

    let json_path = dir.path().join("fe.json");
    let json = athermal(
        &[&["cost"][..], &sweep, &["--format", "json", "--out", json_path.to_str().unwrap()]].concat(),
        &job,
        &[],
    );
    assert!(json.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let jrows = v["rows"].as_array().unwrap();
    assert_eq!(jrows.len(), 20);
    for ((beta, value), r) in rows.iter().zip(jrows) {
        assert_eq!(format!("{:.11e}", r["beta"].as_f64().unwrap()), format!("{beta:.11e}"));
        assert_eq!(format!("{:.11e}", r["value"].as_f64().unwrap()), format!("{value:.11e}"));
    }
}

#[test]
fn invalid_job_lists_fields_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("never.json");
    let job = write_job(
        dir.path(),
        "bad.json",
        &format!(r#"{{"channel": {ID2}, "beta": -1, "epsilon": 1.5, "colour": 3}}"#),
    );
    let out = athermal(&["distill", "--out", out_path.to_str().unwrap()], &job, &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for f in ["beta", "epsilon", "colour"] {
        assert!(err.contains(f), "{f} not reported: {err}");
    }
    assert!(!out_path.exists());
}

#[test]
fn unwritable_output_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(dir.path(), "id2.json", &format!(r#"{{"channel": {ID2}, "beta": 1.0}}"#));
    let target = dir.path().join("missing").join("out.csv");
    let out = athermal(&["cost", "--out", target.to_str().unwrap()], &job, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing"));
    assert!(!target.exists());
}

#[test]
fn random_command_reports_its_channel() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "random.json",
        r#"{"random": {"din": 2, "dout": 2, "hamiltonian": [[0, 0], [0, 1]]}, "beta": 0.7,
            "optimizer": {"restarts": 8}, "seed": 5}"#,
    );
    let out = athermal(&["random"], &job, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["channel"]["kind"], "choi");
    assert_eq!(v["seed"], 5);
}

#[test]
fn help_lists_commands_and_flags() {
    let out = Command::new(env!("CARGO_BIN_EXE_athermal")).arg("--help").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for word in [
        "free-energy", "divergence", "distill", "cost", "work", "entropy", "energy", "verify", "random", "--job",
        "--beta", "--beta-sweep", "--eps", "--alpha", "--seed", "--out", "--format", "--timing",
    ] {
        assert!(text.contains(word), "{word} missing from help");
    }
}
