use std::path::{Path, PathBuf};
use std::process::Command;

use arveson_cli::io::{read_colligation, read_pair, write_colligation, InputError};
use arveson_cli::{EXIT_FAIL, EXIT_INPUT, EXIT_PASS};
use arveson_core::colligation::Colligation;
use arveson_core::numerics::c;
use arveson_core::sampling::{random_matrix, stream_rng};
use serde_json::Value;
use tempfile::TempDir;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_arveson")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn run_with_report(dir: &Path, name: &str, args: &[&str]) -> (i32, Value) {
    let out = dir.join(name).to_string_lossy().into_owned();
    let mut all = vec!["--out", out.as_str()];
    all.extend_from_slice(args);
    let (code, stdout, stderr) = run(&all);
    let text = std::fs::read_to_string(&out).unwrap_or_else(|e| panic!("{e}\n{stdout}\n{stderr}"));
    (code, serde_json::from_str(&text).unwrap())
}

#[test]
fn example_colligation_parses() {
    let u = read_colligation(Path::new(&data("u0.json"))).unwrap();
    assert_eq!((u.d(), u.dim_x(), u.dim_u(), u.dim_y()), (2, 3, 7, 1));
}

#[test]
fn entries_are_complex_pairs() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("pair.json");
    std::fs::write(&path, r#"{"d":1,"dimX":1,"dimY":1,"A":[[[[0.5,0]]]],"C":[[[0.25,-1]]]}"#).unwrap();
    let p = read_pair(&path).unwrap();
    assert_eq!(p.a().blocks()[0][(0, 0)], c(0.5, 0.0));
    assert_eq!(p.c()[(0, 0)], c(0.25, -1.0));
}

#[test]
fn missing_block_reports_position() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("pair.json");
    std::fs::write(&path, "{\n  \"d\": 1, \"dimX\": 1, \"dimY\": 1,\n  \"C\": [[[1, 0]]]\n}\n").unwrap();
    match read_pair(&path) {
        Err(InputError::Parse { line, column, message, .. }) => {
            assert_eq!(line, 4);
            assert!(column > 0);
            assert!(message.contains("A"), "{message}");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn colligation_round_trip_is_exact() {
    let dir = TempDir::new().unwrap();
    let mut rng = stream_rng(11, 0);
    for (d, n, m, k) in [(1, 1, 1, 1), (2, 3, 2, 1), (3, 2, 4, 2), (2, 0, 1, 1)] {
        let u = random_matrix(&mut rng, d * n + k, n + m);
        let coll = Colligation::from_matrix(d, n, &u).unwrap();
        let path = dir.path().join("u.json");
        write_colligation(&path, &coll).unwrap();
        let back = read_colligation(&path).unwrap();
        assert_eq!(back.matrix(), coll.matrix(), "d={d} n={n} m={m} k={k}");
    }
}

#[test]
fn reports_are_deterministic_across_runs_and_threads() {
    let dir = TempDir::new().unwrap();
    let s33 = data("s33.json");
    let pair = data("pair_gamma02.json");
    let args = ["--seed", "5", "realize-with-pair", "--s", &s33, "--pair", &pair];
    let (_, a) = run_with_report(dir.path(), "a.json", &args);
    let (_, b) = run_with_report(dir.path(), "b.json", &args);
    let mut threaded = vec!["--threads", "2"];
    threaded.extend_from_slice(&args);
    let (_, t) = run_with_report(dir.path(), "t.json", &threaded);
    assert_eq!(a, b);
    assert_eq!(a, t);
}

#[test]
fn example_suite_passes() {
    let (code, stdout, _) = run(&["example33"]);
    assert_eq!(code, EXIT_PASS, "{stdout}");
    assert!(stdout.contains("overall: PASS"));
}

#[test]
fn classify_reports_coisometric_example() {
    let dir = TempDir::new().unwrap();
    let (code, report) = run_with_report(dir.path(), "r.json", &["classify", "--colligation", &data("u0.json")]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(report["status"], "pass");
    let class = &report["artifacts"]["colligation"];
    assert_eq!(class["coisometric"], true);
    assert_eq!(class["unitary"], false);
}

#[test]
fn realize_with_pair_writes_a_readable_colligation() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("u.json").to_string_lossy().into_owned();
    let (code, stdout, _) = run(&[
        "realize-with-pair",
        "--s",
        &data("s33.json"),
        "--pair",
        &data("pair_gamma02.json"),
        "--colligation-out",
        &out,
    ]);
    assert_eq!(code, EXIT_PASS, "{stdout}");
    let u = read_colligation(Path::new(&out)).unwrap();
    let p = read_pair(Path::new(&data("pair_gamma02.json"))).unwrap();
    assert_eq!((u.d(), u.dim_x(), u.dim_y()), (2, p.dim_x(), 1));
    assert_eq!(u.pair().c(), p.c());
}

#[test]
fn complete_with_isometric_parameter_is_coisometric() {
    let (code, stdout, _) = run(&[
        "complete",
        "--s",
        &data("s33.json"),
        "--pair",
        &data("pair_gamma02.json"),
        "--q",
        &data("q_unit.json"),
    ]);
    assert_eq!(code, EXIT_PASS, "{stdout}");
    assert!(stdout.contains("[PASS] coisometric"));
}

#[test]
fn overlap_demo_passes() {
    let (code, stdout, _) = run(&["overlap-demo"]);
    assert_eq!(code, EXIT_PASS, "{stdout}");
    let (code, stdout, _) = run(&["overlap-demo", "--s", &data("coordinates.json"), "--pair", &data("unit_pair.json")]);
    assert_eq!(code, EXIT_PASS, "{stdout}");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let (code, _, stderr) = run(&["classify", "--colligation", "/nonexistent/u.json"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(stderr.contains("/nonexistent/u.json"), "{stderr}");

    let config = dir.path().join("cfg.json");
    std::fs::write(&config, r#"{"radius": 1.5}"#).unwrap();
    let (code, _, _) = run(&["--config", config.to_str().unwrap(), "example33"]);
    assert_eq!(code, EXIT_INPUT);

    std::fs::write(&config, r#"{"bogus": 1}"#).unwrap();
    let (code, _, _) = run(&["--config", config.to_str().unwrap(), "example33"]);
    assert_eq!(code, EXIT_INPUT);

    let (code, _, _) = run(&["no-such-command"]);
    assert_eq!(code, EXIT_INPUT);

    // a pair file has no B or D blocks
    let (code, _, _) = run(&["classify", "--colligation", &data("pair_gamma0.json")]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn failing_checks_exit_with_one() {
    // gamma = 0.2 pair against the coordinate multiplier: kernels differ
    let (code, stdout, _) = run(&["kernel-check", "--s", &data("coordinates.json"), "--pair", &data("pair_gamma02.json")]);
    assert_eq!(code, EXIT_FAIL, "{stdout}");
    assert!(stdout.contains("[FAIL] kernel_equality"));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(&config, r#"{"seed": 3, "samples": 20}"#).unwrap();
    let cfg = config.to_string_lossy().into_owned();
    let (code, report) = run_with_report(dir.path(), "r.json", &["--config", &cfg, "--seed", "4", "kernel-check", "--s", &data("s33.json")]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(report["seed"], 4);
    assert_eq!(report["command"], "kernel-check");
}
