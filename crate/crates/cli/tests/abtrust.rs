use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn abtrust(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abtrust")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn assert_failure(o: &Output, code: i32) {
    assert_eq!(
        o.status.code(),
        Some(code),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(o.stdout.is_empty(), "failure wrote to stdout: {}", stdout(o));
    assert!(!o.stderr.is_empty());
}

const EXAMPLE_CSV: &str = "0,5,6,6\n8,0,5,5\n5,6,0,2\n0,4,0,0\n";

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn center_point_renders_first_table() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.csv", EXAMPLE_CSV);
    let o = abtrust(&["center-point", "--matrix", &m, "--initial", "1,2,3,4", "--tol", "5e-5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[3], "t^1  6.2000  4.8750  5.3333  3.6667");
    assert_eq!(lines[9], "t^7  6.4311  5.0708  5.5591  4.3994");
    assert!(lines[10].starts_with("converged after 7 iterations"));
}

#[test]
fn center_point_far_initial() {
    let o = abtrust(&[
        "center-point",
        "--example",
        "--initial",
        "100,300,200,100",
        "--tol",
        "5e-5",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("t^1    6.8000    5.2500    5.2500    4.1667"));
}

#[test]
fn solve_accepts_rational_and_decimal_alpha() {
    let run = |alpha: &str| {
        stdout(&abtrust(&[
            "solve",
            "--example",
            "--alpha",
            alpha,
            "--initial",
            "1,2,3,4",
            "--tol",
            "5e-5",
            "--format",
            "csv",
        ]))
    };
    let rational = run("1/6");
    assert!(rational.starts_with("k,t1,t2,t3,t4\n0,1,2,3,4\n"));
    assert_eq!(rational.lines().count(), 9);
    let decimal = run("0.1666666666666666");
    assert_eq!(decimal.lines().count(), 9);
}

#[test]
fn solve_json_schema() {
    let o = abtrust(&[
        "solve",
        "--example",
        "--alpha",
        "1/3",
        "--initial",
        "1,2,3,4",
        "--tol",
        "5e-5",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["iterations", "residual", "solution", "trace"]);
    assert_eq!(v["iterations"], 10);
    assert_eq!(v["trace"].as_array().unwrap().len(), 11);
    assert!((v["solution"][0].as_f64().unwrap() - 6.1606).abs() < 1e-4);
    assert!(v["residual"].as_f64().unwrap() < 1e-3);
}

#[test]
fn reproduction_paths_need_explicit_settings() {
    assert_failure(
        &abtrust(&["solve", "--example", "--initial", "1,2,3,4", "--tol", "5e-5"]),
        2,
    );
    assert_failure(&abtrust(&["solve", "--example", "--alpha", "1/3", "--tol", "5e-5"]), 2);
    assert_failure(&abtrust(&["center-point", "--example", "--initial", "1,2,3,4"]), 2);
}

#[test]
fn failure_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_failure(
        &abtrust(&[
            "center-point",
            "--matrix",
            "/no/such/file",
            "--initial",
            "1",
            "--tol",
            "1e-3",
        ]),
        2,
    );
    let bad = write(dir.path(), "bad.csv", "0,11\n1,0\n");
    assert_failure(
        &abtrust(&["center-point", "--matrix", &bad, "--initial", "1,1", "--tol", "1e-3"]),
        2,
    );
    let reducible = write(dir.path(), "red.csv", "0,5,0\n5,0,0\n5,5,0\n");
    assert_failure(
        &abtrust(&[
            "center-point",
            "--matrix",
            &reducible,
            "--initial",
            "1,1,1",
            "--tol",
            "1e-3",
        ]),
        3,
    );
    assert_failure(&abtrust(&["analyze", "--matrix", &reducible]), 3);
    let o = abtrust(&[
        "solve",
        "--example",
        "--alpha",
        "1/3",
        "--initial",
        "1,2,3,4",
        "--tol",
        "5e-5",
        "--max-iters",
        "3",
    ]);
    assert_failure(&o, 4);
    assert_failure(
        &abtrust(&["center-point", "--example", "--initial", "1,2,3", "--tol", "5e-5"]),
        2,
    );
    assert_failure(
        &abtrust(&[
            "solve",
            "--example",
            "--alpha",
            "1/0",
            "--initial",
            "1,2,3,4",
            "--tol",
            "5e-5",
        ]),
        2,
    );
    assert_failure(
        &abtrust(&["simulate", "--peers", "30", "--edge-prob", "0.001", "--seed", "3"]),
        6,
    );
}

#[test]
fn out_flag_writes_file_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t1.txt");
    let o = abtrust(&[
        "center-point",
        "--example",
        "--initial",
        "1,2,3,4",
        "--tol",
        "5e-5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success() && o.stdout.is_empty());
    assert!(fs::read_to_string(out).unwrap().contains("4.8750"));
}

#[test]
fn manifest_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("run.json");
    let first = abtrust(&[
        "solve",
        "--example",
        "--alpha",
        "1/3",
        "--initial",
        "100,300,200,100",
        "--tol",
        "5e-5",
        "--format",
        "json",
        "--save-manifest",
        manifest.to_str().unwrap(),
    ]);
    assert!(first.status.success());
    let again = abtrust(&["run", "--manifest", manifest.to_str().unwrap()]);
    assert!(again.status.success());
    assert_eq!(first.stdout, again.stdout);

    let inline = write(
        dir.path(),
        "inline.json",
        r#"{"command":"center_point","matrix":[[0,5,6,6],[8,0,5,5],[5,6,0,2],[0,4,0,0]],"initial":[1,2,3,4],"tol":5e-5}"#,
    );
    let o = abtrust(&["run", "--manifest", &inline]);
    assert!(stdout(&o).contains("t^1  6.2000  4.8750  5.3333  3.6667"));
    let bad = write(dir.path(), "bad.json", r#"{"command":"solve","typo":1}"#);
    assert_failure(&abtrust(&["run", "--manifest", &bad]), 2);
}

#[test]
fn verify_paper_json_lists_iteration_counts() {
    let o = abtrust(&["verify-paper", "--format", "json"]);
    let body = if o.status.success() { o.stdout } else { o.stderr };
    let v: Value = serde_json::from_slice(&body).unwrap();
    let tables = v["tables"].as_array().unwrap();
    let printed: Vec<u64> = tables
        .iter()
        .map(|t| t["expected_iterations"].as_u64().unwrap())
        .collect();
    assert_eq!(printed, [7, 7, 10, 11, 8]);
    for t in tables {
        assert!(t["length_ok"].as_bool().unwrap());
    }
}

#[test]
fn analyze_example_passes() {
    let o = abtrust(&["analyze", "--example", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    let d = &v["dynamics"];
    assert!((d["spectral_radius_a"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((d["spectral_radius_b"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(d["spectral_radius_a_minus_b"].as_f64().unwrap() < 1.0);
}

#[test]
fn analyze_unrestricted_positive_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "pos.csv", "2.5,1,7\n0.3,4,2\n6,1.5,0.9\n");
    let o = abtrust(&["analyze", "--unrestricted", "--matrix", &m, "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["positive"]["passed"], true);
    assert!(v["positive"]["cosine_distance"].as_f64().unwrap() < 1e-6);
    // the same file is outside the rating scale for the restricted path
    assert_failure(&abtrust(&["analyze", "--matrix", &m]), 2);
}

#[test]
fn simulate_example_within_tolerance() {
    let o = abtrust(&["simulate", "--example", "--seeds", "1,2,3", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["within_tolerance"], true);
    assert_eq!(v["comparison"]["entries"].as_array().unwrap().len(), 4);
    assert!(v["comparison"]["max_pairwise_deviation"].as_f64().unwrap() < 5e-4);
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--peers", "50", "--seed", "7", "--seeds", "1,2,3"];
    let (a, b) = (abtrust(&args), abtrust(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn malicious_peers_trail_honest_mean() {
    for seed in 1..=10 {
        let o = abtrust(&[
            "simulate",
            "--peers",
            "50",
            "--honest-fraction",
            "0.6",
            "--seed",
            &seed.to_string(),
            "--seeds",
            "1",
            "--format",
            "json",
        ]);
        assert!(o.status.success());
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        let net = &v["network"];
        let honest_mean = net["honest_mean_trust"].as_f64().unwrap();
        let malicious_mean = net["malicious_mean_trust"].as_f64().unwrap();
        assert!(
            malicious_mean < honest_mean,
            "seed {seed}: {malicious_mean} vs {honest_mean}"
        );
    }
}
