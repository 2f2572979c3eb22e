use std::process::{Command, Output};

fn symdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symdyn")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn path_grid_writes_csv_and_exits_zero() {
    let o = symdyn(&["path", "--t-grid", "0,1/4,1/2,3/4,1", "--depth", "6", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 11);
    assert!(text.lines().next().unwrap().ends_with("lipschitz,nested"));
}

#[test]
fn density_of_a_coset_is_exact() {
    let o = symdyn(&["density", "--rank", "1", "--scales", "3,6", "--set", r#"{"cosets": {"level": 1, "reps": [1]}}"#]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("\"lower\": \"1/3\""));
}

#[test]
fn failing_assertions_give_exit_one() {
    let o = symdyn(&["krieger", "--first-level", "1", "--depth", "12", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("assertion failed"));
}

#[test]
fn flags_override_the_spec_file() {
    let dir = std::env::temp_dir().join(format!("symdyn-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let spec = dir.join("spec.json");
    let out = dir.join("out.json");
    std::fs::write(&spec, r#"{"kind": "verify", "suite": "chain", "seed": 1, "output": {"format": "csv"}}"#).unwrap();
    let o = symdyn(&["verify", "--spec", spec.to_str().unwrap(), "--seed", "7", "--format", "json", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(report["inputs"]["seed"], 7);
    assert_eq!(report["inputs"]["suite"], "chain");
    assert_eq!(report["passed"], true);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn schema_errors_name_the_field() {
    let dir = std::env::temp_dir().join(format!("symdyn-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let spec = dir.join("spec.json");
    std::fs::write(&spec, r#"{"kind": "path", "depth": -3}"#).unwrap();
    let o = symdyn(&["path", "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("/depth"));
    std::fs::remove_dir_all(&dir).unwrap();
}
