use std::path::PathBuf;
use std::process::Command;

use qtensor::cli::{run_cli_with, RUN_REPORT_SCHEMA};
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let argv: Vec<String> = std::iter::once("qtensor").chain(args.iter().copied()).map(String::from).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli_with(&argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn report(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?} failed: {err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let schema: Value = serde_json::from_str(RUN_REPORT_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations for {args:?}: {errors:?}");
    v
}

/// Report with the timing fields removed.
fn stable(mut v: Value) -> Value {
    let obj = v.as_object_mut().unwrap();
    for key in ["wall_ms", "reps", "peak_bytes"] {
        obj.remove(key);
    }
    v
}

#[test]
fn bell_expectation_of_z0_is_zero() {
    let (bell, z0) = (data("bell.json"), data("z0.json"));
    let v = report(&["expval", "--circuit", &bell, "--ham", &z0]);
    assert_eq!(v["command"], "expval");
    assert_eq!(v["seed"], 42);
    assert!(v["value"].as_f64().unwrap().abs() < 1e-12);
    let tt = report(&["expval", "--circuit", &bell, "--ham", &z0, "--engine", "tt", "--chi", "2"]);
    assert!(tt["value"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn input_problems_exit_with_two() {
    let z0 = data("z0.json");
    let (code, out, err) = run(&["expval", "--circuit", "missing.json", "--ham", &z0]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("missing.json"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n_qubits\": 2, \"gates\": [{\"name\": \"nope\", \"wires\": [0]}]}").unwrap();
    let bad = bad.display().to_string();
    assert_eq!(run(&["expval", "--circuit", &bad, "--ham", &z0]).0, 2);
    assert_eq!(run(&["expval", "--circuit", &data("bell.json")]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["ptrace", "--n", "4", "--keep", "0,9"]).0, 2);
    assert_eq!(run(&["ptrace", "--n", "4", "--keep", "0,0"]).0, 2);
    assert_eq!(run(&["paths", "--network", &data("chain.json"), "--strategy", "magic"]).0, 2);
    assert_eq!(run(&["bench", "ptrace", "--n", "20", "--keep-size", "15"]).0, 2);
    assert_eq!(run(&["expval", "--circuit", &data("bell.json"), "--ham", &z0, "--engine", "tt", "--chi", "0"]).0, 2);
}

#[test]
fn gradient_methods_agree() {
    let (c, h) = (data("ansatz4.json"), data("tfim4.json"));
    let grads: Vec<Vec<f64>> = ["ad", "shift", "fd"]
        .iter()
        .map(|m| {
            let v = report(&["grad", "--circuit", &c, "--ham", &h, "--method", m]);
            v["grad"].as_array().unwrap().iter().map(|g| g.as_f64().unwrap()).collect()
        })
        .collect();
    assert_eq!(grads[0].len(), 7);
    for k in 0..7 {
        assert!((grads[0][k] - grads[1][k]).abs() < 1e-10);
        assert!((grads[0][k] - grads[2][k]).abs() < 1e-6);
    }
    let tt = report(&["grad", "--circuit", &c, "--ham", &h, "--engine", "tt", "--eps", "0"]);
    for (k, g) in tt["grad"].as_array().unwrap().iter().enumerate() {
        assert!((g.as_f64().unwrap() - grads[0][k]).abs() < 1e-10);
    }
}

#[test]
fn theta_override_changes_the_value() {
    let (c, h) = (data("rx.json"), data("z0_single.json"));
    let v = report(&["expval", "--circuit", &c, "--ham", &h, "--theta", "-1.2"]);
    assert!((v["value"].as_f64().unwrap() - (-1.2f64).cos()).abs() < 1e-12);
    assert_eq!(run(&["expval", "--circuit", &c, "--ham", &h, "--theta", "1,2"]).0, 2);
}

#[test]
fn simulate_reports_state_and_bonds() {
    let v = report(&["simulate", "--circuit", &data("bell.json"), "--engine", "tt"]);
    assert_eq!(v["bond_dims"], serde_json::json!([1, 2, 1]));
    let amps = v["amplitudes"].as_array().unwrap();
    assert!((amps[0][0].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((amps[3][0].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn ptrace_of_bell_marginal() {
    let v = report(&["ptrace", "--circuit", &data("bell.json"), "--keep", "1"]);
    assert!((v["purity"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["entropy"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
    let r = report(&["ptrace", "--n", "8", "--keep-size", "3", "--reps", "3"]);
    assert_eq!(r["reps"].as_array().unwrap().len(), 3);
    assert!((r["trace"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn maxcut_on_small_graphs() {
    let v = report(&["maxcut", "--graph", &data("triangle.txt"), "--restarts", "3"]);
    assert_eq!(v["cut"], 2.0);
    assert_eq!(v["optimal"], 2.0);
    let c4 = report(&["maxcut", "--graph", &data("c4.txt")]);
    assert_eq!(c4["cut"], 4.0);
    assert_eq!(c4["assignment"].as_array().unwrap().len(), 4);
}

#[test]
fn paths_on_the_chain() {
    let v = report(&["paths", "--network", &data("chain.json"), "--strategy", "optimal"]);
    assert_eq!(v["est_flops"], 64.0);
    let g = report(&["paths", "--network", &data("chain.json"), "--objective", "memory"]);
    assert!(g["est_peak_memory"].as_f64().unwrap() > 0.0);
}

#[test]
fn reruns_reproduce_everything_but_timings() {
    let graph = data("c4.txt");
    let cases: Vec<Vec<&str>> = vec![
        vec!["maxcut", "--graph", &graph, "--seed", "9", "--restarts", "2"],
        vec!["ptrace", "--n", "6", "--keep", "1,4", "--seed", "3"],
        vec!["bench", "tfim", "--n", "12", "--gates", "120", "--grad", "--seed", "5"],
        vec!["bench", "ptrace", "--n", "10", "--keep-size", "4", "--reps", "2"],
    ];
    for args in cases {
        assert_eq!(stable(report(&args)), stable(report(&args)), "{args:?}");
    }
    let a = stable(report(&["bench", "tfim", "--n", "12", "--gates", "120", "--seed", "5"]));
    let b = stable(report(&["bench", "tfim", "--n", "12", "--gates", "120", "--seed", "6"]));
    assert_ne!(a["value"], b["value"]);
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["bench", "tfim", "--n", "10", "--gates", "100", "--grad"];
    let one = stable(report(&[&args[..], &["--threads", "1"]].concat()));
    let two = stable(report(&[&args[..], &["--threads", "2"]].concat()));
    assert_eq!(one, two);
    assert_eq!(run(&[&args[..], &["--threads", "0"]].concat()).0, 2);
}

#[test]
fn csv_has_one_row_per_rep() {
    let (code, out, _) = run(&["bench", "ptrace", "--n", "8", "--keep-size", "2", "--reps", "4", "--format", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "rep,phase,wall_ms");
    assert_eq!(lines.iter().filter(|l| l.contains(",ptrace,")).count(), 4);
}

#[test]
fn binary_exit_codes_and_tracking() {
    let exe = env!("CARGO_BIN_EXE_qtensor");
    let out = Command::new(exe)
        .args(["expval", "--circuit", &data("bell.json"), "--ham", &data("z0.json")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["peak_bytes"].as_u64().unwrap() > 0);

    let out = Command::new(exe).args(["expval", "--circuit", "missing.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let out = Command::new(exe).arg("--version").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains(qtensor::cli::VERSION));
}
