use std::fs;

use madelung::scenario::{
    builtin, execute, list_scenarios, parse_cell, run_scenario, run_suite, CheckKind, ScenarioConfig, OBSERVABLES_FILE,
    SNAPSHOTS_FILE, SUMMARY_FILE,
};
use madelung::Error;

const REQUIRED: [&str; 9] = [
    "free_gaussian",
    "plane_wave_eigenstate",
    "thm21_equivalence",
    "thm44_hamiltonian",
    "submersion_pullback",
    "heat_entropy_dissipation",
    "dlss_descent",
    "benamou_brenier_action",
    "newton_residual",
];

fn small() -> ScenarioConfig {
    builtin("uniform_stationary").unwrap()
}

#[test]
fn listing_is_complete_and_stable() {
    let names: Vec<String> = list_scenarios().into_iter().map(|s| s.name).collect();
    assert!(names.len() >= 9);
    for required in REQUIRED {
        assert!(names.iter().any(|n| n == required), "missing {required}");
    }
    let again: Vec<String> = list_scenarios().into_iter().map(|s| s.name).collect();
    assert_eq!(names, again);
    for s in list_scenarios() {
        assert!(!s.description.is_empty());
        s.validate().unwrap();
    }
}

#[test]
fn json_round_trip() {
    for s in list_scenarios() {
        assert_eq!(ScenarioConfig::from_json(&s.to_json()).unwrap(), s);
    }
}

#[test]
fn nonpositive_dt_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    for dt in ["0", "-1e-3"] {
        let mut config = small();
        config.integrator.dt = dt.parse().unwrap();
        assert!(matches!(run_scenario(&config, &out), Err(Error::Config(_))));
        assert!(matches!(
            small().with_overrides(&[format!("integrator.dt={dt}")]),
            Err(Error::Config(_))
        ));
    }
    assert!(!out.exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let mut doc: serde_json::Value = serde_json::from_str(&small().to_json()).unwrap();
    doc["grid"]["spacing"] = serde_json::json!(0.1);
    assert!(matches!(ScenarioConfig::from_json(&doc.to_string()), Err(Error::Config(_))));

    let mut doc: serde_json::Value = serde_json::from_str(&small().to_json()).unwrap();
    doc["colour"] = serde_json::json!("blue");
    assert!(ScenarioConfig::from_json(&doc.to_string()).is_err());

    let mut doc: serde_json::Value = serde_json::from_str(&small().to_json()).unwrap();
    doc["potential"] = serde_json::json!({"kind": "cosine_well", "depth": 1.0, "center": 0.0, "width": 2.0});
    assert!(ScenarioConfig::from_json(&doc.to_string()).is_err());

    let mut doc: serde_json::Value = serde_json::from_str(&small().to_json()).unwrap();
    doc["potential"] = serde_json::json!({"kind": "harmonic"});
    assert!(ScenarioConfig::from_json(&doc.to_string()).is_err());
}

#[test]
fn schema_version_is_checked() {
    let mut config = small();
    config.schema = 2;
    assert!(matches!(config.validate(), Err(Error::Config(_))));
}

#[test]
fn overrides_edit_nested_fields() {
    let config = small()
        .with_overrides(&["grid.n=32", "constants.hbar=0.5", "integrator.T=0.5", "checks.0.tolerance=1e-9", "name=renamed"])
        .unwrap();
    assert_eq!(config.grid.n, 32);
    assert_eq!(config.constants.hbar, 0.5);
    assert_eq!(config.integrator.t_final, 0.5);
    assert_eq!(config.checks[0].tolerance, 1e-9);
    assert_eq!(config.name, "renamed");
    assert!(small().with_overrides(&["grid.n"]).is_err());
    assert!(small().with_overrides(&["checks.9.tolerance=1"]).is_err());
    assert!(small().with_overrides(&["grid.n=\"many\""]).is_err());
}

#[test]
fn checks_must_match_the_solver() {
    let config = small();
    let bad = config.with_overrides(&["checks.0.name=entropy_dissipation"]);
    assert!(matches!(bad, Err(Error::Config(_))));
    let bad = builtin("free_gaussian").unwrap().with_overrides(&["potential={\"kind\":\"cosine_well\",\"depth\":1,\"center\":0}"]);
    assert!(matches!(bad, Err(Error::Config(_))));
    let bad = builtin("benamou_brenier_action").unwrap().with_overrides(&["integrator.T=0.5"]);
    assert!(matches!(bad, Err(Error::Config(_))));
}

#[test]
fn uniform_state_residuals_vanish() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_scenario(&small(), dir.path()).unwrap();
    assert!(outcome.passed);
    let csv = fs::read_to_string(dir.path().join(OBSERVABLES_FILE)).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(
        &header[..8],
        &["time", "mass", "H_S", "H_F", "entropy", "fisher", "L_F", "gauge_constant"]
    );
    for line in lines {
        for (col, cell) in header.iter().zip(line.split(',')) {
            if col.starts_with("residual_") {
                assert!(parse_cell(cell).unwrap().unwrap() < 1e-10);
            }
        }
    }
    assert!(dir.path().join(SNAPSHOTS_FILE).exists());
    assert!(dir.path().join(SUMMARY_FILE).exists());
}

#[test]
fn equivalence_scenario_passes() {
    let run = execute(&builtin("thm21_equivalence").unwrap()).unwrap();
    let density = run.residuals.iter().find(|r| r.check.name == CheckKind::DensityEquivalence).unwrap();
    assert!(density.max().unwrap() < 1e-3);
}

#[test]
fn summary_agrees_with_csv() {
    let dir = tempfile::tempdir().unwrap();
    for config in list_scenarios() {
        let out = dir.path().join(&config.name);
        run_scenario(&config, &out).unwrap();
        let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join(SUMMARY_FILE)).unwrap()).unwrap();
        let csv = fs::read_to_string(out.join(OBSERVABLES_FILE)).unwrap();
        let mut lines = csv.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
        let mut all = true;
        for check in summary["checks"].as_array().unwrap() {
            let name = check["name"].as_str().unwrap();
            let col = header.iter().position(|h| *h == format!("residual_{name}")).unwrap();
            let max = rows
                .iter()
                .filter_map(|r| parse_cell(r[col]).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(max, check["max_residual"].as_f64().unwrap(), "{} {name}", config.name);
            let passed = max <= check["tolerance"].as_f64().unwrap();
            assert_eq!(passed, check["passed"].as_bool().unwrap());
            all &= passed;
        }
        assert_eq!(all, summary["passed"].as_bool().unwrap());
    }
}

#[test]
fn reruns_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = builtin("free_gaussian").unwrap();
    run_scenario(&config, &dir.path().join("a")).unwrap();
    run_scenario(&config, &dir.path().join("b")).unwrap();
    for file in [OBSERVABLES_FILE, SNAPSHOTS_FILE, SUMMARY_FILE] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn solver_failure_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    // an explicit step far beyond the stability limit of the fourth-order flow
    let config = builtin("dlss_descent").unwrap().with_overrides(&["integrator.dt=0.05", "integrator.snapshot_stride=1"]).unwrap();
    let outcome = run_scenario(&config, dir.path()).unwrap();
    assert!(!outcome.passed);
    assert!(outcome.error.is_some());
    assert_eq!(outcome.failed_stage.as_deref(), Some("solver"));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(summary["passed"], false);
    assert!(!dir.path().join(OBSERVABLES_FILE).exists());
}

#[test]
fn failed_check_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let config = small().with_overrides(&["checks.1.tolerance=1e-30"]).unwrap();
    let outcome = run_scenario(&config, dir.path()).unwrap();
    assert!(!outcome.passed);
    assert_eq!(outcome.failed_stage.as_deref(), Some("stationarity"));
}

#[test]
fn refinement_halves_the_step() {
    let config = builtin("thm44_hamiltonian")
        .unwrap()
        .with_overrides(&["integrator.refine={\"tolerance\":1e-6,\"max_halvings\":3}", "integrator.T=0.2"])
        .unwrap();
    let run = execute(&config).unwrap();
    assert!(run.dt < config.integrator.dt);
    let mut plain = config.clone();
    plain.integrator.refine = None;
    let coarse = execute(&plain).unwrap();
    assert_eq!(run.trajectory.len(), coarse.trajectory.len());
    for (a, b) in run.trajectory.times().iter().zip(coarse.trajectory.times()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn suite_runs_every_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let outcomes = run_suite(dir.path(), 4).unwrap();
    assert_eq!(outcomes.len(), list_scenarios().len());
    for (o, s) in outcomes.iter().zip(list_scenarios()) {
        assert_eq!(o.scenario, s.name);
        assert!(o.passed, "{} failed: {:?}", o.scenario, o.checks);
    }
}
