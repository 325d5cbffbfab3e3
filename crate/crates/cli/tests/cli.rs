//! End-to-end runs of the `qmeter` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qmeter(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmeter"))
        .args(args)
        .current_dir(dir)
        .env_remove("QMETER_SEED")
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s}"))
}

#[test]
fn random_sweep_writes_full_table() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qmeter(&["random-sweep", "--trials", "1000", "--seed", "42", "--out", "a"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = tmp.path().join("a/random_sweep.csv");
    let header = fs::read_to_string(&csv).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "trial,d_S,d_P,seed,cv2,xi,noise_ratio,lhs,rhs,residual,status,satisfied");
    let table = rows(&csv);
    assert_eq!(table.len(), 1000);
    for r in &table {
        if r[10] == "ok" {
            assert_eq!(r[11], "true");
            assert!(num(&r[7]) >= num(&r[8]) * (1.0 - 1e-7) - 1e-9);
        }
    }
    for name in ["random_sweep_points.csv", "random_sweep_reference.csv", "manifest.json"] {
        assert!(tmp.path().join("a").join(name).exists(), "{name}");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &["random-sweep", "--trials", "0"][..],
        &["random-sweep", "--format", "xml"],
        &["ndr", "--xi", "-1"],
        &["ndr", "--b", "sigma_w"],
        &["frobnicate"],
    ] {
        assert_eq!(code(&qmeter(args, tmp.path())), 2, "{args:?}");
    }
    let bad = Command::new(env!("CARGO_BIN_EXE_qmeter"))
        .args(["random-sweep", "--trials", "1"])
        .current_dir(tmp.path())
        .env("QMETER_SEED", "not-a-seed")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn seed_environment_replaces_default_only() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |env: Option<&str>, extra: &[&str], out: &str| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_qmeter"));
        c.args(["random-sweep", "--trials", "5", "--out", out]).args(extra).current_dir(tmp.path());
        match env {
            Some(s) => c.env("QMETER_SEED", s),
            None => c.env_remove("QMETER_SEED"),
        };
        assert_eq!(code(&c.output().unwrap()), 0);
        fs::read(tmp.path().join(out).join("random_sweep.csv")).unwrap()
    };
    let from_env = run(Some("123"), &[], "env");
    let from_flag = run(None, &["--seed", "123"], "flag");
    let flag_wins = run(Some("999"), &["--seed", "123"], "both");
    let default = run(None, &[], "default");
    assert_eq!(from_env, from_flag);
    assert_eq!(flag_wins, from_flag);
    assert_ne!(default, from_flag);
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.conf"), "trials = 7\nseed = 3\ndim_range = 2, 3\n").unwrap();
    fs::write(tmp.path().join("run.json"), r#"{"trials": 4, "dim_range": [2]}"#).unwrap();
    assert_eq!(code(&qmeter(&["random-sweep", "--config", "run.conf", "--out", "c"], tmp.path())), 0);
    let table = rows(&tmp.path().join("c/random_sweep.csv"));
    assert_eq!(table.len(), 7);
    assert!(table.iter().all(|r| r[1] == "2" || r[1] == "3"));
    let o = qmeter(&["random-sweep", "--config", "run.json", "--trials", "2", "--out", "j"], tmp.path());
    assert_eq!(code(&o), 0);
    let table = rows(&tmp.path().join("j/random_sweep.csv"));
    assert_eq!(table.len(), 2);
    assert!(table.iter().all(|r| r[1] == "2" && r[2] == "2"));
    fs::write(tmp.path().join("bad.conf"), "trials = many\n").unwrap();
    assert_eq!(code(&qmeter(&["random-sweep", "--config", "bad.conf"], tmp.path())), 2);
}

#[test]
fn qubit_tradeoff_rows_respect_the_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qmeter(&["qubit-tradeoff", "--trials", "100", "--seed", "7", "--out", "q"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = rows(&tmp.path().join("q/qubit_tradeoff.csv"));
    assert_eq!(table.len(), 100);
    for r in &table {
        let (residual, xi, one_plus, cv2) = (num(&r[1]), num(&r[2]), num(&r[3]), num(&r[4]));
        assert!(residual <= 1e-5);
        assert!((cv2 - 4.0).abs() < 1e-9);
        assert!(one_plus >= 4.0 / xi - 1e-7);
        assert_eq!(r[5], "true");
    }
    let summary = rows(&tmp.path().join("q/qubit_tradeoff_summary.csv"));
    assert_eq!(summary[0][1], "100");
    let reference = rows(&tmp.path().join("q/qubit_tradeoff_reference.csv"));
    for r in &reference {
        assert!((num(&r[0]) * num(&r[1]) - 4.0).abs() < 1e-12);
    }
}

#[test]
fn single_qubit_trial_has_valid_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qmeter(&["qubit-tradeoff", "--trials", "1", "--out", "one", "--format", "json"], tmp.path());
    assert_eq!(code(&o), 0);
    let records: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("one/qubit_tradeoff.json")).unwrap()).unwrap();
    assert_eq!(records.as_array().unwrap().len(), 1);
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("one/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["subcommand"], "qubit-tradeoff");
    assert_eq!(m["config"]["trials"], 1);
    assert_eq!(m["timestamp"], 1_700_000_000u64);
    for out in m["outputs"].as_array().unwrap() {
        assert!(tmp.path().join("one").join(out.as_str().unwrap()).exists());
    }
}

#[test]
fn ndr_emits_floors_and_frontier() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qmeter(&["ndr", "--trials", "10", "--xi", "2", "--xi", "1", "--out", "n"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let floors = rows(&tmp.path().join("n/ndr_floors.csv"));
    assert_eq!(num(&floors[0][2]), 1.0);
    assert!((num(&floors[1][2]) - 3f64.sqrt()).abs() < 1e-15);
    for r in rows(&tmp.path().join("n/ndr.csv")) {
        assert!(num(&r[5]) >= 0.0);
        assert_eq!(&r[6..], ["true", "true", "true"]);
    }
    // At zero noise the frontier sits at 1 + κ − 1 = κ = 1 for σ_x.
    let frontier = rows(&tmp.path().join("n/ndr_frontier.csv"));
    assert!((num(&frontier[0][1]) - 1.0).abs() < 1e-12);

    let o = qmeter(&["ndr", "--trials", "3", "--b", "sigma_z", "--out", "z"], tmp.path());
    assert_eq!(code(&o), 0);
    assert!(rows(&tmp.path().join("z/ndr_frontier.csv")).iter().all(|r| num(&r[1]) == 0.0));
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("z/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["summary"]["commutator_mean_abs"], 0.0);
    assert_eq!(m["options"]["b"], "sigma_z");
}

fn matrix(rows: &[[f64; 4]]) -> serde_json::Value {
    let zeros = [[0.0f64; 4]; 4];
    serde_json::json!({"dim": 4, "re": rows, "im": zeros})
}

#[test]
fn verify_audits_schemes() {
    let tmp = tempfile::tempdir().unwrap();
    let id = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
    // M = (σ_z + I) ⊗ I_P.
    let m = [[2.0, 0.0, 0.0, 0.0], [0.0, 2.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]];
    let scheme = serde_json::json!({
        "d_S": 2, "d_P": 2, "U": matrix(&id), "M": matrix(&m),
        "rho_P": {"dim": 2, "re": [[0.5, 0.0], [0.0, 0.5]], "im": [[0.0, 0.0], [0.0, 0.0]]},
    });
    fs::write(tmp.path().join("scheme.json"), scheme.to_string()).unwrap();
    let state = serde_json::json!({"dim": 2, "re": [[0.5, 0.0], [0.0, 0.5]], "im": [[0.0, 0.5], [-0.5, 0.0]]});
    fs::write(tmp.path().join("state.json"), state.to_string()).unwrap();
    let o = qmeter(&["verify", "scheme.json", "state.json"], tmp.path());
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{text}");
    assert!(text.contains("survival activity: unbounded"));
    assert!(text.contains("vacuous"));

    let mut bad = scheme.clone();
    bad["rho_P"]["re"][0][0] = serde_json::json!(0.9);
    fs::write(tmp.path().join("bad.json"), bad.to_string()).unwrap();
    let o = qmeter(&["verify", "bad.json", "state.json"], tmp.path());
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("trace") && err.contains("rho_P"), "{err}");

    // A target the scheme is not unbiased for is a physics failure.
    let mut biased = scheme.clone();
    biased["A"] = serde_json::json!({"dim": 2, "re": [[1.0, 0.0], [0.0, -1.0]], "im": [[0.0, 0.0], [0.0, 0.0]]});
    fs::write(tmp.path().join("biased.json"), biased.to_string()).unwrap();
    let o = qmeter(&["verify", "biased.json", "state.json"], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unbiasedness"));
}

#[test]
fn dumped_schemes_verify() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qmeter(&["qubit-tradeoff", "--trials", "3", "--seed", "11", "--dump", "--out", "d"], tmp.path());
    assert_eq!(code(&o), 0);
    let table = rows(&tmp.path().join("d/qubit_tradeoff.csv"));
    for (i, row) in table.iter().enumerate() {
        let stem = format!("d/schemes/trial_{i:04}");
        let o = qmeter(
            &["verify", &format!("{stem}.scheme.json"), &format!("{stem}.state.json"), "--out", &format!("v{i}"), "--format", "json"],
            tmp.path(),
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
        let audit: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(tmp.path().join(format!("v{i}/audit.json"))).unwrap()).unwrap();
        let xi = audit["xi"].as_f64().unwrap();
        assert!((xi - num(&row[2])).abs() <= 1e-9 * xi);
    }
    let o = qmeter(&["random-sweep", "--trials", "4", "--dump", "--out", "r"], tmp.path());
    assert_eq!(code(&o), 0);
    let o = qmeter(&["verify", "r/schemes/trial_0002.scheme.json", "r/schemes/trial_0002.state.json"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}
