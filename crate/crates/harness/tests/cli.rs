use std::io::Write;
use std::process::{Command, Output, Stdio};

fn qms(args: &[&str], stdin: &[u8], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qms"));
    cmd.args(args).env_remove("QMS_TOL_SCALE").stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().unwrap();
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn generated(kind: &str, dim: &str) -> Vec<u8> {
    let out = qms(&["generate", "--kind", kind, "--dim", dim, "--seed", "5"], b"", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn thermal_qubit_passes_with_exit_zero() {
    let out = qms(&["check"], &generated("thermal-qubit", "2"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["vectorization"], "column-stacking");
    assert_eq!(v["exit_code"], 0);
    assert_eq!(v["checks"].as_array().unwrap().len(), 12);
}

#[test]
fn failing_check_exits_one() {
    let out = qms(&["check", "-"], &generated("transpose-counterexample", "2"), &[]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let cp = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "cp").unwrap();
    assert_eq!(cp["verdict"], "fail");
}

#[test]
fn schema_errors_exit_two_with_a_diagnostic() {
    let out = qms(&["check"], br#"{"dim": 2, "generator": {"kind": "nope"}}"#, &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("qms: "), "{err}");
    assert!(err.contains("generator"), "{err}");
    assert!(out.stdout.is_empty());

    let out = qms(&["check", "/nonexistent/spec.json"], b"", &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dimension_cap_exits_two() {
    let spec = generated("gksl-random", "3");
    let out = qms(&["check", "--max-dim", "2"], &spec, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--max-dim"));
}

#[test]
fn tolerance_scale_comes_from_flag_or_environment() {
    let spec = generated("thermal-qubit", "2");
    let v = json(&qms(&["check"], &spec, &[("QMS_TOL_SCALE", "4")]));
    assert_eq!(v["tolerance_scale"].as_f64(), Some(4.0));
    let v = json(&qms(&["check", "--tol-scale", "8"], &spec, &[("QMS_TOL_SCALE", "4")]));
    assert_eq!(v["tolerance_scale"].as_f64(), Some(8.0));
    let out = qms(&["check", "--tol-scale", "0"], &spec, &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = qms(&["check"], &spec, &[("QMS_TOL_SCALE", "abc")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn text_format_has_one_line_per_check_and_a_summary() {
    let out = qms(&["check", "--format", "text"], &generated("thermal-qubit", "2"), &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["faithful", "schwarz", "theorem4", "ccp", "gksl"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}\n{text}");
    }
    assert!(text.lines().last().unwrap().starts_with("summary: "));
}

#[test]
fn sign_convention_is_recorded() {
    let spec = generated("thermal-qubit", "2");
    let v = json(&qms(&["check", "--sign-convention", "plus"], &spec, &[]));
    assert_eq!(v["sign_convention"], "plus");
}

#[test]
fn reports_are_reproducible_unless_timed() {
    let spec = generated("gksl-random", "2");
    let a = qms(&["check"], &spec, &[]);
    let b = qms(&["check"], &spec, &[]);
    assert_eq!(a.stdout, b.stdout);
    let t = json(&qms(&["check", "--timing"], &spec, &[]));
    assert!(t["checks"][0]["timing_ms"].is_number());
    assert!(json(&a)["checks"][0].get("timing_ms").is_none());
}

#[test]
fn decompose_emits_spectrum_and_jumps() {
    let out = qms(&["decompose"], &generated("thermal-qubit", "2"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let mut lambda: Vec<f64> = v["lambda"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    lambda.sort_by(f64::total_cmp);
    for (got, want) in lambda.iter().zip([1.0, 2.5, 2.5, 4.0]) {
        assert!((got - want).abs() < 1e-8, "{lambda:?}");
    }
    assert!(v["gksl"]["residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn decompose_of_a_degenerate_generator_fails_cleanly() {
    let spec = br#"{"dim": 1, "generator": {"kind": "gksl", "hamiltonian": [[[0, 0]]], "jumps": []}}"#;
    let out = qms(&["decompose"], spec, &[]);
    // dim 1 has a unique state; this one decomposes trivially.
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let spec = br#"{"dim": 2, "generator": {"kind": "gksl", "hamiltonian": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]], "jumps": []}}"#;
    let out = qms(&["decompose"], spec, &[]);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("qms: "));
}

#[test]
fn generate_accepts_an_instance_file_on_stdin_path() {
    let dir = std::env::temp_dir().join(format!("qms-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("inst.json");
    std::fs::write(&path, br#"{"dim": 2, "kind": "gksl-random", "parameters": {"num_jumps": 1}, "seed": 5}"#).unwrap();
    let out = qms(&["generate", path.to_str().unwrap()], b"", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["generator"]["jumps"].as_array().unwrap().len(), 1);
    std::fs::remove_dir_all(&dir).unwrap();

    let out = qms(&["generate", "--kind", "thermal-qubit", "--dim", "3"], b"", &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = qms(&["generate", "--kind", "bogus", "--dim", "2"], b"", &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = qms(&["generate"], b"", &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generated_specs_round_trip_through_the_cli() {
    let spec = generated("unitary-commutant", "3");
    let out = qms(&["check", "--format", "text"], &spec, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
