//! End-to-end contract of the binary: golden-file runs, the exit-code
//! table, trace emission, the verification report, and norm printing.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_proxkit")
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("golden").join(name)
}

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_proxkit(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Output {
        code: out.status.code().expect("no signal"),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn parse_final_point(stdout: &str) -> Vec<f64> {
    let line = stdout
        .lines()
        .find(|l| l.starts_with("final point:"))
        .expect("final point line");
    let inner = line
        .split_once('[')
        .expect("bracket")
        .1
        .trim_end_matches(']');
    inner
        .split(',')
        .map(|t| t.trim().parse::<f64>().expect("float"))
        .collect()
}

#[test]
fn golden_lasso_converges_to_oracle_solution() {
    let out = run_proxkit(&["run", golden("lasso.json").to_str().unwrap()], &[]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert!(out.stdout.contains("termination: tol_reached"));
    let p = parse_final_point(&out.stdout);
    assert!((p[0] - 0.0).abs() <= 1e-6 && (p[1] - 0.75).abs() <= 1e-6, "{p:?}");
}

#[test]
fn exit_code_table_is_stable() {
    let lasso = golden("lasso.json");
    let lasso = lasso.to_str().unwrap();

    // 2: iteration cap reached before the tolerance
    let out = run_proxkit(&["run", lasso, "--max-iter", "1"], &[]);
    assert_eq!(out.code, 2, "stdout: {}", out.stdout);
    assert!(out.stdout.contains("termination: max_iter"));

    // 3: step outside the admissible interval, message cites the interval
    let out = run_proxkit(&["run", lasso, "--step", "0.75"], &[]);
    assert_eq!(out.code, 3);
    assert!(
        out.stderr.contains("admissible") && out.stderr.contains("2/beta"),
        "stderr: {}",
        out.stderr
    );

    // 1: missing file
    let out = run_proxkit(&["run", "does_not_exist.json"], &[]);
    assert_eq!(out.code, 1);

    // 1: malformed JSON
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = run_proxkit(&["run", bad.to_str().unwrap()], &[]);
    assert_eq!(out.code, 1);

    // 1: unsupported schema version
    let versioned = dir.path().join("v2.json");
    let text = std::fs::read_to_string(golden("lasso.json")).unwrap();
    std::fs::write(&versioned, text.replace("\"schema_version\": 1", "\"schema_version\": 2"))
        .unwrap();
    let out = run_proxkit(&["run", versioned.to_str().unwrap()], &[]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("schema_version"));

    // 1: dimension inconsistency names the field path
    let mismatched = dir.path().join("cols.json");
    let text = std::fs::read_to_string(golden("lasso.json")).unwrap();
    std::fs::write(&mismatched, text.replace("\"cols\": 2", "\"cols\": 3")).unwrap();
    let out = run_proxkit(&["run", mismatched.to_str().unwrap()], &[]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("payload.L.cols"), "stderr: {}", out.stderr);
}

#[test]
fn trace_file_honors_the_layout_contract() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = run_proxkit(
        &[
            "run",
            golden("lasso.json").to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.code, 0);
    let iterations: usize = out
        .stdout
        .lines()
        .find(|l| l.starts_with("termination:"))
        .and_then(|l| l.split_whitespace().rev().nth(1))
        .and_then(|n| n.parse().ok())
        .expect("iteration count");

    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    // comment lines first, echoing the configuration
    let first = lines.next().unwrap();
    assert!(first.starts_with('#') && first.contains("kind=lasso"));
    let second = lines.next().unwrap();
    assert!(second.starts_with('#') && second.contains("step=auto"));
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "n,objective,gap_if_mu_known,step,displacement,grad_residual"
    );
    let rows: Vec<&str> = lines.collect();
    // every trace_every-th iterate plus the last
    assert_eq!(rows.len(), iterations + 1);

    // objective column is nonincreasing for this scheme
    let objectives: Vec<f64> = rows
        .iter()
        .map(|r| r.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(objectives.windows(2).all(|w| w[1] <= w[0] + 1e-10));

    // the gap column is filled since the instance has an oracle optimum
    assert!(rows[0].split(',').nth(2).unwrap().parse::<f64>().is_ok());
}

#[test]
fn trace_sampling_keeps_every_third_row_plus_last() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(golden("lasso.json")).unwrap();
    let sampled = dir.path().join("sampled.json");
    std::fs::write(&sampled, text.replace("\"trace_every\": 1", "\"trace_every\": 3"))
        .unwrap();
    let trace = dir.path().join("trace.csv");
    let out = run_proxkit(
        &[
            "run",
            sampled.to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.code, 0);
    let iterations: usize = out
        .stdout
        .lines()
        .find(|l| l.starts_with("termination:"))
        .and_then(|l| l.split_whitespace().rev().nth(1))
        .and_then(|n| n.parse().ok())
        .unwrap();
    let text = std::fs::read_to_string(&trace).unwrap();
    let rows = text.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows, iterations.div_ceil(3) + 1);
}

#[test]
fn check_command_reports_pass_and_detects_faults() {
    let lasso = golden("lasso.json");
    let lasso = lasso.to_str().unwrap();
    let out = run_proxkit(&["check", lasso], &[("PROXKIT_SEED", "123")]);
    assert_eq!(out.code, 0, "stdout: {}", out.stdout);
    assert!(out.stdout.contains("seed 123"));
    assert!(out.stdout.contains("PASS  prox characterization"));
    assert!(out.stdout.contains("PASS  gradient vs finite differences"));
    assert!(out.stdout.contains("PASS  objective monotonicity"));
    assert!(out.stdout.contains("PASS  grid cross-check"));
    assert!(!out.stdout.contains("FAIL"));

    let out = run_proxkit(&["check", lasso, "--inject-prox-fault"], &[]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("FAIL  prox characterization"));
}

#[test]
fn check_passes_on_projection_style_problems() {
    let out = run_proxkit(
        &["check", golden("minkowski.json").to_str().unwrap()],
        &[],
    );
    assert_eq!(out.code, 0, "stdout: {}", out.stdout);
    assert!(out.stdout.contains("PASS  projection characterization [set0]"));
    assert!(out.stdout.contains("PASS  projection characterization [set1]"));
}

#[test]
fn norms_command_prints_estimates() {
    let out = run_proxkit(&["norms", golden("lasso.json").to_str().unwrap()], &[]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("||L|| = 2.00000000000e0"));
    assert!(out.stdout.contains("beta = 4.00000000000e0"));
}

#[test]
fn golden_files_round_trip_through_the_schema() {
    for name in [
        "lasso.json",
        "elastic_net.json",
        "best_approximation.json",
        "minkowski.json",
        "multichannel.json",
        "alternating.json",
        "support_regularized.json",
    ] {
        let text = std::fs::read_to_string(golden(name)).unwrap();
        let parsed = proxkit_cli::schema::parse_problem_str(&text).unwrap();
        let serialized = proxkit_cli::schema::serialize_problem(&parsed);
        let reparsed = proxkit_cli::schema::parse_problem_str(&serialized).unwrap();
        assert_eq!(parsed, reparsed, "round trip changed {name}");
    }
}
