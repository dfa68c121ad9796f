//! End-to-end tests against the compiled binary.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn mpnf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpnf"))
        .args(args)
        .env_remove("MPNF_PROFILE")
        .output()
        .expect("binary runs")
}

fn mpnf_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mpnf"))
        .args(args)
        .env_remove("MPNF_PROFILE")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child.stdin.as_mut().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn generate(name: &str) -> String {
    let out = mpnf(&["states", "generate", name]);
    assert!(out.status.success());
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn states_generate_emits_tensor_json() {
    let v: serde_json::Value = serde_json::from_str(&generate("ghz3")).unwrap();
    assert_eq!(v["dims"], serde_json::json!([2, 2, 2]));
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 8);
    let first = entries[0][0].as_f64().unwrap();
    assert!((first - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
}

#[test]
fn normal_form_on_w_diverges_and_strict_exits_3() {
    let w = generate("w");
    let out = mpnf_stdin(&["normal-form", "-"], &w);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["status"], "diverged_to_zero");
    assert_eq!(out.status.code(), Some(0));

    let strict = mpnf_stdin(&["normal-form", "-", "--strict"], &w);
    assert_eq!(strict.status.code(), Some(3));
}

#[test]
fn normal_form_on_ghz_converges_with_identity_filters() {
    let g = generate("ghz3");
    let out = mpnf_stdin(&["normal-form", "-", "--strict"], &g);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["status"], "converged");
    assert_eq!(v["result"]["iterations"], 1);
}

#[test]
fn monotone_golden_values() {
    let bb = generate("two-bell-product");
    let out = mpnf_stdin(&["monotone", "-", "--id", "tangle2222a"], &bb);
    let v = stdout_json(&out);
    assert!((v["result"]["value"].as_f64().unwrap() - 1.0).abs() <= 1e-9);

    let zz = r#"{"dims":[2,2],"entries":[[1.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]]}"#;
    let out = mpnf_stdin(&["monotone", "-", "--id", "concurrence"], zz);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn monotone_list_names_seven_specs() {
    let out = mpnf(&["monotone", "--list"]);
    let v = stdout_json(&out);
    assert_eq!(v["catalog"].as_array().unwrap().len(), 7);
}

#[test]
fn unknown_monotone_id_is_a_structured_error() {
    let bb = generate("bell");
    let out = mpnf_stdin(&["monotone", "-", "--id", "nope"], &bb);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "unknown_monotone");
}

#[test]
fn malformed_json_is_a_structured_error() {
    let out = mpnf_stdin(&["normal-form", "-"], "{not json");
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "malformed_json");
}

#[test]
fn entry_count_mismatch_is_rejected() {
    let out = mpnf_stdin(&["normal-form", "-"], r#"{"dims":[2,2],"entries":[[1.0,0.0]]}"#);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "entry_count_mismatch");
}

#[test]
fn randomized_commands_are_deterministic_given_a_seed() {
    let g = generate("ghz3");
    let run = || {
        let out = mpnf_stdin(
            &["invariance-check", "-", "--id", "tangle222", "--trials", "20", "--seed", "99"],
            &g,
        );
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run(), run(), "same invocation and seed must be byte-identical");
}

#[test]
fn randomized_commands_without_seed_print_one() {
    let g = generate("bell");
    let out = mpnf_stdin(
        &["invariance-check", "-", "--id", "concurrence", "--trials", "5"],
        &g,
    );
    let v = stdout_json(&out);
    assert!(v["seed"].as_u64().is_some());
    assert_eq!(v["result"]["pass"], true);
}

#[test]
fn monotonicity_check_passes_on_ghz() {
    let g = generate("ghz3");
    let out = mpnf_stdin(
        &["monotonicity-check", "-", "--id", "tangle222", "--trials", "25", "--seed", "7"],
        &g,
    );
    let v = stdout_json(&out);
    assert_eq!(v["result"]["pass"], true);
}

#[test]
fn equivalence_distinguishes_ghz_from_w() {
    let dir = std::env::temp_dir();
    let p1 = dir.join("mpnf_test_ghz.json");
    let p2 = dir.join("mpnf_test_w.json");
    std::fs::write(&p1, generate("ghz3")).unwrap();
    std::fs::write(&p2, generate("w")).unwrap();
    let out = mpnf(&[
        "equivalence",
        p1.to_str().unwrap(),
        p2.to_str().unwrap(),
        "--seed",
        "11",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "inequivalent");
}

#[test]
fn lu_normal_form_reports_pattern() {
    let g = generate("ghz3");
    let out = mpnf_stdin(&["lu-normal-form", "-"], &g);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["status"], "converged");
    assert_eq!(v["zero_count_equal_dims"], 3);
    assert_eq!(v["result"]["zero_pattern"].as_array().unwrap().len(), 3);
    assert!(v["result"]["max_pattern_residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn optimal_filter_on_procrustean_state() {
    let psi = format!(
        r#"{{"dims":[2,2],"entries":[[{},0.0],[0.0,0.0],[0.0,0.0],[{},0.0]]}}"#,
        0.9f64.sqrt(),
        0.1f64.sqrt()
    );
    let out = mpnf_stdin(&["optimal-filter", "-"], &psi);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["status"], "converged");
    assert!((v["result"]["probability_proxy"].as_f64().unwrap() - 0.2).abs() < 1e-9);
}

#[test]
fn density_inputs_round_trip_through_normal_form() {
    // Maximally mixed two-qubit state: already in normal form.
    let mut entries = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            entries.push([if i == j { 0.25 } else { 0.0 }, 0.0]);
        }
    }
    let rho = serde_json::json!({ "kind": "density", "dims": [2, 2], "entries": entries });
    let out = mpnf_stdin(&["normal-form", "-", "--strict"], &rho.to_string());
    let v = stdout_json(&out);
    assert_eq!(v["result"]["status"], "converged");
    assert_eq!(v["result"]["sigma"]["kind"], "density");
}

#[test]
fn unknown_flags_are_rejected() {
    let out = mpnf(&["states", "generate", "w", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn custom_spec_file_is_accepted() {
    // The concurrence wiring, supplied as a user spec.
    let spec = serde_json::json!({
        "id": "user-concurrence",
        "description": "degree-2 two-qubit invariant",
        "dims": [2, 2],
        "degree": 2,
        "wirings": [[[0, 1]], [[0, 1]]],
        "prefactor": { "num": 1, "den": 1, "root": 1 },
        "exponent": [1, 1],
    });
    let dir = std::env::temp_dir();
    let path = dir.join("mpnf_test_spec.json");
    std::fs::write(&path, spec.to_string()).unwrap();
    let bell = generate("bell");
    let out = mpnf_stdin(&["monotone", "-", "--spec", path.to_str().unwrap()], &bell);
    let v = stdout_json(&out);
    assert!((v["result"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn tolerance_profile_env_var_is_honored() {
    let g = generate("ghz3");
    let out = Command::new(env!("CARGO_BIN_EXE_mpnf"))
        .args(["normal-form", "-"])
        .env("MPNF_PROFILE", "loose")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .and_then(|mut c| {
            c.stdin.as_mut().unwrap().write_all(g.as_bytes())?;
            c.wait_with_output()
        })
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["profile"], "loose");
    assert_eq!(v["config"]["epsilon_id"].as_f64().unwrap(), 1e-7);

    let bad = Command::new(env!("CARGO_BIN_EXE_mpnf"))
        .args(["states", "list"])
        .env("MPNF_PROFILE", "bogus")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
