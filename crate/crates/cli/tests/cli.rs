use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn madelung(args: &[&str], out_root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_madelung"))
        .args(args)
        .env("MADELUNG_OUT", out_root)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_prints_builtins() {
    let dir = tempfile::tempdir().unwrap();
    let out = madelung(&["list"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().count() >= 9);
    assert!(text.contains("thm21_equivalence"));
    assert_eq!(text, stdout(&madelung(&["list"], dir.path())));
}

#[test]
fn run_builtin_uses_env_root() {
    let dir = tempfile::tempdir().unwrap();
    let out = madelung(&["run", "uniform_stationary"], dir.path());
    assert!(out.status.success(), "{}", stdout(&out));
    for file in ["observables.csv", "snapshots.json", "summary.json"] {
        assert!(dir.path().join("uniform_stationary").join(file).exists());
    }
}

#[test]
fn run_from_config_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let shown = madelung(&["show", "plane_wave_eigenstate"], dir.path());
    assert!(shown.status.success());
    let config = dir.path().join("pw.json");
    fs::write(&config, shown.stdout).unwrap();
    let target = dir.path().join("custom");
    let out = madelung(
        &[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            target.to_str().unwrap(),
            "--override",
            "initial_state.k=2",
            "--override",
            "integrator.T=0.5",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stdout(&out));
    let csv = fs::read_to_string(target.join("observables.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    assert!(last.starts_with("5.0000000000000000e-1,"));
}

#[test]
fn invalid_config_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = madelung(&["run", "uniform_stationary", "--override", "integrator.dt=0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt"));
    assert!(!dir.path().join("uniform_stationary").exists());

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"schema\": 1, \"name\": \"x\", \"bogus\": true}").unwrap();
    let out = madelung(&["run", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_check_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = madelung(&["run", "uniform_stationary", "--override", "checks.1.tolerance=1e-30"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAILED"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("uniform_stationary/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["failed_stage"], "stationarity");
}

#[test]
fn suite_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let first = madelung(&["suite", "--jobs", "4", "--out", a.to_str().unwrap()], dir.path());
    assert!(first.status.success(), "{}", stdout(&first));
    let second = madelung(&["suite", "--out", b.to_str().unwrap()], dir.path());
    assert!(second.status.success());
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        let x = fs::read(a.join(&name).join("observables.csv")).unwrap();
        let y = fs::read(b.join(&name).join("observables.csv")).unwrap();
        assert_eq!(x, y, "{name:?}");
    }
}
