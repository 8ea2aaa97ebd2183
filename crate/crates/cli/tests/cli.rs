use std::process::{Command, Output};

fn plateau(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plateau"))
        .args(args)
        .env_remove("BARREN_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn bounds_prints_the_qsl_value() {
    let o = plateau(&["bounds", "--task", "qsl", "--n", "4", "--m", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "bound_qsl = 0.25"), "{text}");
    assert!(text.lines().any(|l| l.starts_with("bound_general = ")));
}

#[test]
fn scaling_output_is_byte_identical_across_runs_and_threads() {
    let args = [
        "scaling",
        "--task",
        "vqe",
        "--n",
        "2",
        "--n-max",
        "3",
        "--samples",
        "2",
        "--seed",
        "7",
    ];
    let a = plateau(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    let b = plateau(&args);
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_plateau"))
        .args(args)
        .env("BARREN_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("task,n,m,ensemble_config,samples"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn scaling_writes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let o = plateau(&[
        "scaling",
        "--task",
        "qsl",
        "--n",
        "2",
        "--samples",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);
}

#[test]
fn config_file_fields_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(
        &path,
        r#"{"task": "qae", "n_min": 3, "n_max": 4, "samples": 3, "seed": 5}"#,
    )
    .unwrap();
    let o = plateau(&["scaling", "--config", path.to_str().unwrap(), "--samples", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows
        .iter()
        .all(|r| r.starts_with("qae,") && r.split(',').nth(4) == Some("2")));
    assert!(stderr(&o).contains("Haar-random pure state"));
}

#[test]
fn layers_prefixes_the_layer_count() {
    let o = plateau(&[
        "layers",
        "--task",
        "vqe",
        "--n",
        "2",
        "--samples",
        "2",
        "--layer-list",
        "1,3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let firsts: Vec<&str> = text.lines().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(firsts, vec!["layers", "1", "3"]);
}

#[test]
fn missing_task_prints_usage_and_exits_1() {
    let o = plateau(&["scaling", "--n", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_exits_1() {
    let o = plateau(&["scaling", "--task", "vqe", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_values_exit_1() {
    assert_eq!(
        plateau(&["scaling", "--task", "vqe", "--n", "13"]).status.code(),
        Some(1)
    );
    assert_eq!(plateau(&["scaling", "--task", "nope"]).status.code(), Some(1));
    assert_eq!(plateau(&["bounds", "--task", "vqe", "--n", "1"]).status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("rows.csv");
    let o = plateau(&[
        "scaling",
        "--task",
        "vqe",
        "--n",
        "2",
        "--samples",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_config_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"task": "vqe", "qubits": 4}"#).unwrap();
    let o = plateau(&["scaling", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("qubits"), "{}", stderr(&o));
}

#[test]
fn help_exits_0() {
    let o = plateau(&["--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("scaling"));
}

#[test]
fn validate_haar_passes_on_a_small_run() {
    let o = plateau(&["validate-haar", "--samples", "400", "--pairs", "2"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn selftest_passes() {
    let o = plateau(&["selftest"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("[PASS]")));
}
