use std::fs;
use std::path::Path;
use std::process::Command;

fn rdmv(args: &[&str], cwd: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_rdmv")).args(args).current_dir(cwd).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr))
}

const CONTACT: &str = r#"
model = "euler"
t_end = 0.2
sample_dt = 0.01
[grid]
n = 100
[ic]
kind = "contact"
"#;

#[test]
fn run_then_verify_report() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), CONTACT).unwrap();
    let (code, out) = rdmv(&["run", "--config", "c.toml", "--out", "o"], dir.path());
    assert_eq!(code, 0, "{out}");
    assert!(dir.path().join("o/trajectory_00.csv").exists());
    assert!(dir.path().join("o/relative_energy_00.csv").exists());
    let (code, out) = rdmv(&["verify", "--report", "o/report.json"], dir.path());
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("overall        pass"));
}

#[test]
fn failing_report_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), CONTACT).unwrap();
    assert_eq!(rdmv(&["run", "--config", "c.toml", "--out", "o"], dir.path()).0, 0);
    let path = dir.path().join("o/report.json");
    let mut report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    report["pass"] = serde_json::Value::Bool(false);
    fs::write(&path, report.to_string()).unwrap();
    assert_eq!(rdmv(&["verify", "--report", "o/report.json"], dir.path()).0, 1);
}

#[test]
fn errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "model = \"euler\"\nt_end = 0.1\n[ic]\nkind = \"sod\"\ncolour = 1\n").unwrap();
    let (code, out) = rdmv(&["sweep", "--config", "bad.toml"], dir.path());
    assert_eq!(code, 2);
    assert!(out.contains("colour"), "{out}");
    assert_eq!(rdmv(&["verify", "--report", "missing.json"], dir.path()).0, 2);
    fs::write(dir.path().join("sod.toml"), "model = \"euler\"\nt_end = 0.1\n[ic]\nkind = \"sod\"\n").unwrap();
    assert_eq!(rdmv(&["weak-strong", "--config", "sod.toml"], dir.path()).0, 2);
}
