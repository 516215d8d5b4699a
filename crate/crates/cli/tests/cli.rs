//! End-to-end contract tests for the hgeom binary: exit codes, output
//! formats, config merging, and threading determinism knobs.

use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hgeom")).args(args).output().expect("spawn hgeom")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hgeom"))
        .args(args)
        .env(key, value)
        .output()
        .expect("spawn hgeom")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8(bytes.to_vec()).expect("utf8 output")
}

#[test]
fn malformed_surface_is_a_usage_error() {
    let out = run(&["verify", "--surface", "torus", "--n", "2"]);
    assert_eq!(code(&out), 2);
    assert!(text(&out.stderr).contains("gauge-ball"), "error should list valid kinds");
}

#[test]
fn missing_sweep_inputs_are_usage_errors() {
    let out = run(&["sweep", "--n", "1", "--c", "3"]);
    assert_eq!(code(&out), 2);
    let out = run(&["sweep", "--n", "1", "--phi0", "0.5"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unparseable_flag_value_is_a_usage_error() {
    let out = run(&["sweep", "--n", "1", "--c", "3", "--phi0", "abc"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unsupported_dimension_is_a_usage_error() {
    let out = run(&["verify", "--surface", "gauge-ball", "--n", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn config_schema_is_pinned() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("config.json");
    fs::write(&path, "{\"schema\": 2}").expect("write config");
    let out = run(&[
        "verify",
        "--config",
        path.to_str().expect("path"),
        "--surface",
        "gauge-ball",
        "--n",
        "1",
    ]);
    assert_eq!(code(&out), 2);
    assert!(text(&out.stderr).contains("schema"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("config.json");
    fs::write(&path, "{\"schema\": 1, \"extra\": true}").expect("write config");
    let out = run(&[
        "verify",
        "--config",
        path.to_str().expect("path"),
        "--surface",
        "gauge-ball",
        "--n",
        "1",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn off_surface_flow_start_is_a_usage_error() {
    let out = run(&["flow", "--surface", "gauge-ball", "--R", "1", "--n", "1", "--start", "2,0,0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn wrong_start_length_is_a_usage_error() {
    let out = run(&["flow", "--surface", "gauge-ball", "--R", "1", "--n", "1", "--start", "1,0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_reports_all_checks_passing() {
    let out = run(&[
        "verify",
        "--surface",
        "gauge-ball",
        "--R",
        "1",
        "--n",
        "2",
        "--samples",
        "40",
        "--seed",
        "7",
    ]);
    assert_eq!(code(&out), 0);
    let body = text(&out.stdout);
    assert!(!body.contains('\r'));
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("check,max_residual,threshold,status"));
    let mut names = Vec::new();
    for line in lines {
        assert!(line.ends_with(",pass"), "unexpected row: {line}");
        names.push(line.split(',').next().expect("row name"));
    }
    for expected in [
        "normal_t_pairing",
        "bracket_normal",
        "codazzi",
        "umbilic_residual",
        "closed_form_mean_curvature",
        "closed_form_shape_matrix",
        "phi_h_magnitude",
        "phi_v_deviation",
    ] {
        assert!(names.contains(&expected), "missing check {expected}");
    }
}

#[test]
fn ellipsoid_profile_verifies() {
    let out = run(&[
        "verify",
        "--surface",
        "profile:ellipsoid",
        "--a",
        "2",
        "--b",
        "1",
        "--n",
        "2",
        "--samples",
        "40",
    ]);
    assert_eq!(code(&out), 0);
    let body = text(&out.stdout);
    assert!(body.contains("profile_k_agreement"));
    assert!(body.contains("profile_l_agreement"));
}

#[test]
fn degenerate_fd_step_fails_the_run() {
    let out = run(&[
        "verify",
        "--surface",
        "gauge-ball",
        "--R",
        "1",
        "--n",
        "2",
        "--samples",
        "5",
        "--fd-step",
        "1e-13",
    ]);
    assert_eq!(code(&out), 1);
    assert!(text(&out.stdout).contains(",fail"));
}

#[test]
fn sweep_reports_measured_against_formula() {
    let out = run(&["sweep", "--n", "1", "--c", "3", "--phi0", "0,0.5"]);
    assert_eq!(code(&out), 0);
    let body = text(&out.stdout);
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines[0], "phi0,delta_t_measured,delta_t_formula,classification");
    assert_eq!(lines.len(), 3);

    let pole: Vec<&str> = lines[1].split(',').collect();
    let measured: f64 = pole[1].parse().expect("measured drop");
    let formula: f64 = pole[2].parse().expect("formula drop");
    assert!((measured + 2.0).abs() < 1e-6);
    assert!((formula + 2.0).abs() < 1e-12);
    assert_eq!(pole[3], "closes-at-pole");

    let cycle: Vec<&str> = lines[2].split(',').collect();
    let measured: f64 = cycle[1].parse().expect("measured drop");
    let formula: f64 = cycle[2].parse().expect("formula drop");
    assert!((measured - formula).abs() < 1e-6);
    assert_eq!(cycle[3], "t-unbounded");
}

#[test]
fn descending_branch_has_no_formula_column() {
    let out = run(&["sweep", "--n", "1", "--c", "3", "--phi0", "-0.1", "--initial-radius", "0.9"]);
    assert_eq!(code(&out), 0);
    let body = text(&out.stdout);
    let row: Vec<&str> = body.lines().nth(1).expect("data row").split(',').collect();
    assert_eq!(row[2], "");
    assert_eq!(row[3], "t-unbounded");
}

#[test]
fn sphere_report_matches_closed_forms() {
    let out = run(&["sphere-report", "--R", "1", "--t0", "0", "--n", "1", "--samples", "100"]);
    assert_eq!(code(&out), 0);
    let body = text(&out.stdout);
    let header = body.lines().next().expect("header");
    assert_eq!(
        header,
        "index,r,h,h_closed,h_diff,k,k_closed,k_diff,l,l_closed,l_diff,phi_h,phi_h_closed,phi_h_diff,phi_v,phi_v_closed,phi_v_diff,p_h_norm,p_h_norm_closed,p_h_norm_diff,nu_t,nu_t_closed,nu_t_diff"
    );
    assert_eq!(body.lines().count(), 101);
    let row: Vec<&str> = body.lines().nth(1).expect("data row").split(',').collect();
    assert_eq!(row[5], "", "no transverse eigenvalue at n = 1");
    let h_diff: f64 = row[4].parse().expect("h_diff");
    assert!(h_diff.abs() < 1e-8);
}

#[test]
fn output_flag_writes_the_report() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("report.csv");
    let args = ["verify", "--surface", "gauge-ball", "--n", "1", "--samples", "20", "--seed", "3"];
    let piped = run(&args);
    assert_eq!(code(&piped), 0);
    let mut with_output: Vec<&str> = args.to_vec();
    with_output.extend_from_slice(&["--output", path.to_str().expect("path")]);
    let filed = run(&with_output);
    assert_eq!(code(&filed), 0);
    assert!(filed.stdout.is_empty());
    assert_eq!(fs::read(&path).expect("read report"), piped.stdout);
}

#[test]
fn json_reports_parse() {
    let out = run(&[
        "verify",
        "--surface",
        "gauge-ball",
        "--n",
        "2",
        "--samples",
        "20",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json report");
    assert_eq!(v["command"], "verify");
    assert_eq!(v["status"], "pass");
    assert_eq!(v["n"], 2);
    assert!(v["rows"].is_array());

    let out = run(&["sweep", "--n", "1", "--c", "3", "--phi0", "0.5", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json report");
    assert_eq!(v["command"], "sweep");
    assert_eq!(v["rows"][0]["classification"], "t-unbounded");
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("config.json");
    fs::write(
        &path,
        "{\"schema\": 1, \"seed\": 5, \"verify\": {\"surface\": \"gauge-ball\", \"n\": 1, \"samples\": 40}}",
    )
    .expect("write config");
    let out = run(&[
        "verify",
        "--config",
        path.to_str().expect("path"),
        "--samples",
        "10",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json report");
    assert_eq!(v["n"], 1, "n comes from the config file");
    assert_eq!(v["samples"], 10, "flag overrides the file");
    assert_eq!(v["seed"], 5, "seed comes from the config file");
}

#[test]
fn invalid_thread_env_is_a_usage_error() {
    let args = ["verify", "--surface", "gauge-ball", "--n", "1", "--samples", "5"];
    let out = run_env(&args, "HGEOM_THREADS", "abc");
    assert_eq!(code(&out), 2);
    let out = run_env(&args, "HGEOM_THREADS", "2");
    assert_eq!(code(&out), 0);
}

#[test]
fn flow_descends_to_the_pole() {
    let out = run(&["flow", "--surface", "gauge-ball", "--R", "1", "--n", "1", "--start", "1,0,0"]);
    assert_eq!(code(&out), 0);
    let body = text(&out.stdout);
    assert!(!body.contains('\r'));
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("s,x1,y1,t,r,cos_theta,sin_theta,phi_h,phi_v,residual"));
    let mut prev_t = f64::INFINITY;
    let mut last_t = f64::NAN;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 10);
        let t: f64 = fields[3].parse().expect("t column");
        assert!(t <= prev_t + 1e-12, "t must not increase along the flow");
        let residual: f64 = fields[9].parse().expect("residual column");
        assert!(residual < 1e-8);
        prev_t = t;
        last_t = t;
    }
    assert!((last_t + 1.0).abs() < 1e-3, "flow should end near the lower pole");
}
