use std::process::{Command, Output};

use serde_json::Value;

fn padyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_padyn")).args(args).output().expect("spawn padyn")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("error is JSON")
}

fn pairs(v: &Value) -> Vec<(String, String)> {
    v["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p[0].as_str().unwrap().to_string(), p[1].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn orbit_with_identity_check() {
    let out = padyn(&["orbit", "--map", "[2,0,1]/[0,2]", "--start", "1/1", "-n", "6", "--raw", "--check-identity"]);
    let v = stdout_json(&out);
    assert_eq!(v["passed"], true);
    let steps = v["identity"].as_array().unwrap();
    assert_eq!(steps.len(), 6);
    assert!(steps.iter().all(|s| s["status"] == "PASS"));
    assert_eq!(steps[0]["lhs"], "1");
    assert_eq!(steps[0]["rhs"], "1");
    let p = pairs(&v);
    assert_eq!(p.len(), 7);
    // 1 -> 3/2 -> 17/12
    assert_eq!(p[..3], [("1", "1"), ("3", "2"), ("17", "12")].map(|(a, b)| (a.to_string(), b.to_string())));
}

#[test]
fn orbit_zero_steps_is_the_start() {
    let v = stdout_json(&padyn(&["orbit", "--map", "[2,0,1]/[0,2]", "--start", "5/3", "-n", "0"]));
    assert_eq!(pairs(&v), vec![("5".to_string(), "3".to_string())]);
}

#[test]
fn reduced_orbit_accepts_unnormalized_maps() {
    let v = stdout_json(&padyn(&["orbit", "--map", "1/x", "--start", "2", "-n", "3", "--reduced"]));
    let p = pairs(&v);
    assert_eq!(p[1], ("1".to_string(), "2".to_string()));
    assert_eq!(p[2], ("2".to_string(), "1".to_string()));
}

#[test]
fn malformed_map_exits_64_with_parse_error() {
    let out = padyn(&["orbit", "--map", "[2,0,1/[0,2]", "--start", "1/1"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(out.stdout.is_empty());
    let e = stderr_json(&out);
    assert_eq!(e["error"], "ParseError");
    assert!(e["message"].is_string());
}

#[test]
fn usage_errors_exit_64() {
    let out = padyn(&["find-prime", "--map", "x^2", "--start", "2", "--pmin", "3"]);
    assert_eq!(out.status.code(), Some(64));
    assert_eq!(stderr_json(&out)["error"], "UsageError");
    let out = padyn(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(64));
    assert_eq!(stderr_json(&out)["error"], "UsageError");
}

#[test]
fn help_exits_zero() {
    let out = padyn(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("find-prime"));
}

#[test]
fn find_prime_from_seven() {
    let v = stdout_json(&padyn(&["find-prime", "--map", "[0,0,1]/[1]", "--start", "2/1", "--pmin", "7", "--pmax", "50"]));
    let cert = &v["certificate"];
    assert_eq!((cert["p"].as_u64(), cert["m"].as_u64(), cert["a"].as_u64()), (Some(7), Some(0), Some(6)));
    let residues: Vec<u64> = v["orbit_mod_p2"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(residues[..7], [2, 4, 16, 11, 23, 39, 2]);
}

#[test]
fn find_prime_smallest_good_prime_is_five() {
    let v = stdout_json(&padyn(&["find-prime", "--map", "[0,0,1]/[1]", "--start", "2/1", "--pmin", "5", "--pmax", "50"]));
    let cert = &v["certificate"];
    assert_eq!((cert["p"].as_u64(), cert["m"].as_u64(), cert["a"].as_u64()), (Some(5), Some(2), Some(4)));
}

#[test]
fn find_prime_exhausted_range_exits_2() {
    // the certificate at 5 needs period 4
    let out = padyn(&["find-prime", "--map", "x^2", "--start", "2", "--pmin", "5", "--pmax", "5", "--max-period", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "NoPrimeFound");
}

#[test]
fn find_prime_after_conjugation() {
    let v = stdout_json(&padyn(&[
        "find-prime", "--map", "x^2", "--start", "2", "--pmin", "7", "--pmax", "50", "--conjugate", "1,-1,0,1",
    ]));
    // x -> x - 1 sends 2 to 1
    assert_eq!(v["start"], "1/1");
    assert_eq!(v["certificate"]["p"], 7);
}

#[test]
fn classify_indifferent_fixed_point() {
    let v = stdout_json(&padyn(&["classify", "--map", "[0,0,1]/[1]", "--point", "1/1", "--p", "7"]));
    assert_eq!(v["kind"], "Indifferent");
    assert_eq!(v["multiplier"], "2");
    let v = stdout_json(&padyn(&["classify", "--map", "x^2", "--point", "0", "--p", "7"]));
    assert_eq!(v["kind"], "Superattracting");
}

#[test]
fn classify_non_fixed_point_is_rejected() {
    let out = padyn(&["classify", "--map", "x^2", "--point", "2", "--p", "7"]);
    assert_eq!(out.status.code(), Some(64));
    assert_eq!(stderr_json(&out)["error"], "NotFixed");
}

#[test]
fn interpolate_embeds_validation() {
    let v = stdout_json(&padyn(&[
        "interpolate", "--map", "x^2", "--start", "2", "--pmin", "7", "--pmax", "50", "--precision", "16", "--trunc", "16",
        "--samples", "16",
    ]));
    let val = &v["bundle"]["validation"];
    assert_eq!(val["pass"], true);
    assert!(val["min_valuation"].as_i64().unwrap() >= 12);
    assert_eq!(v["bundle"]["classes"].as_array().unwrap().len(), 6);
    assert_eq!(v["progression_compatibility"]["pass"], true);
    assert_eq!(v["composition_cross_check"]["pass"], true);
}

#[test]
fn dml_point_target() {
    let v = stdout_json(&padyn(&["dml", "--map", "x^2", "--start", "2", "--beta", "16", "--n-max", "30"]));
    assert_eq!(v["report"]["finite_members"], serde_json::json!([2]));
    assert_eq!(v["report"]["progressions"], serde_json::json!([]));
}

#[test]
fn dml_periodic_target_and_cross_check() {
    let v = stdout_json(&padyn(&["dml", "--map", "1/x", "--start", "2", "--beta", "2", "--cross-check", "--n-max", "20"]));
    assert_eq!(v["report"]["progressions"], serde_json::json!([{"residue": 0, "modulus": 2, "start": 0}]));
    assert_eq!(v["cross_check"]["agree"], true);
}

#[test]
fn dml_split_curve_target() {
    let v = stdout_json(&padyn(&[
        "dml", "--map", "x^2", "--g", "x+1", "--start", "2", "--start2", "0", "--curve", "x = 16", "--n-max", "30",
    ]));
    assert_eq!(v["report"]["finite_members"], serde_json::json!([2]));
}

#[test]
fn dml_strict_mode_rejects_nonlinear_g() {
    let args = ["dml", "--map", "x^2", "--g", "x^2", "--start", "2", "--start2", "3", "--curve", "x - y", "--n-max", "10"];
    let out = padyn(&args);
    assert_eq!(out.status.code(), Some(64));
    assert_eq!(stderr_json(&out)["error"], "StrictModeViolation");
    let mut lax = args.to_vec();
    lax.push("--lax");
    let out = padyn(&lax);
    assert!(matches!(out.status.code(), Some(0) | Some(2)), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn counterexample_table_matches_legendre() {
    let v = stdout_json(&padyn(&["counterexample", "--p", "7", "-n", "50"]));
    assert_eq!(v["agrees"], true);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 51);
    assert_eq!(rows[6]["valuation"], 0);
    assert_eq!(rows[7]["valuation"], 1);
    assert_eq!(rows[49]["valuation"], 8);
    assert_eq!(rows[50]["valuation"], 8);
}

#[test]
fn json_out_and_job_files_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = padyn(&[
        "find-prime", "--map", "x^2", "--start", "2", "--pmin", "7", "--pmax", "50", "--json-out", out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let from_flags = std::fs::read_to_string(&out_path).unwrap();

    let job_path = dir.path().join("job.json");
    std::fs::write(
        &job_path,
        r#"{"command": "find-prime", "map": {"p": [0, 0, 1], "q": [1]}, "start": [2, 1], "p_min": 7, "p_max": 50}"#,
    )
    .unwrap();
    let out = padyn(&["run", "--job", job_path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), from_flags);
}

#[test]
fn invalid_job_file_exits_64() {
    let dir = tempfile::tempdir().unwrap();
    let job_path = dir.path().join("job.json");
    std::fs::write(&job_path, r#"{"command": "orbit", "map": "x^2"}"#).unwrap();
    let out = padyn(&["run", "--job", job_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
    assert_eq!(stderr_json(&out)["error"], "ParseError");
}

#[test]
fn selfcheck_passes() {
    let v = stdout_json(&padyn(&["selfcheck", "--cases", "20", "--steps", "6", "--seed", "3"]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["seed"], 3);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["dml", "--map", "x^2", "--start", "2", "--beta", "16", "--n-max", "20"];
    assert_eq!(padyn(&args).stdout, padyn(&args).stdout);
}
