use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde_json::{json, Value};

use super::config::ScenarioConfig;
use super::run::{run_scenario, ScenarioOutcome};
use crate::error::{Error, Result};

fn trapped(n: usize) -> Value {
    json!({
        "grid": {"n": n},
        "potential": {"kind": "cosine_well", "depth": 1.0, "center": std::f64::consts::PI},
        "initial_state": {
            "kind": "polar_pair",
            "density": {"kind": "gaussian", "center": std::f64::consts::PI, "sigma": 0.8, "pedestal": 0.0},
            "phase": [{"mode": 1, "sin": 0.3, "cos": 0.0}],
        },
    })
}

fn merge(base: Value, extra: Value) -> Value {
    match (base, extra) {
        (Value::Object(mut a), Value::Object(b)) => {
            for (k, v) in b {
                a.insert(k, v);
            }
            Value::Object(a)
        }
        (_, b) => b,
    }
}

fn documents() -> Vec<Value> {
    vec![
        json!({
            "name": "uniform_stationary",
            "description": "The uniform state with zero phase does not move under the Schrödinger flow.",
            "grid": {"n": 64},
            "potential": {"kind": "none"},
            "initial_state": {"kind": "polar_pair", "density": {"kind": "uniform"}},
            "integrator": {"solver": "schrodinger", "dt": 1e-3, "T": 1.0, "snapshot_stride": 100},
            "checks": [
                {"name": "mass", "tolerance": 1e-10},
                {"name": "stationarity", "tolerance": 1e-10},
                {"name": "energy_drift", "tolerance": 1e-10},
            ],
        }),
        json!({
            "name": "free_gaussian",
            "description": "A free Gaussian packet spreads exactly as the closed-form image sum predicts.",
            "grid": {"n": 256},
            "potential": {"kind": "none"},
            "initial_state": {"kind": "gaussian", "center": std::f64::consts::PI, "sigma": 0.3},
            "integrator": {"solver": "schrodinger", "dt": 1e-3, "T": 0.5, "snapshot_stride": 50},
            "checks": [
                {"name": "mass", "tolerance": 1e-10},
                {"name": "free_packet", "tolerance": 1e-6},
            ],
        }),
        json!({
            "name": "plane_wave_eigenstate",
            "description": "A plane wave only rotates its global phase at the rate ħk²/2.",
            "grid": {"n": 64},
            "potential": {"kind": "none"},
            "initial_state": {"kind": "plane_wave", "k": 3},
            "integrator": {"solver": "schrodinger", "dt": 1e-3, "T": 1.0, "snapshot_stride": 100},
            "checks": [
                {"name": "mass", "tolerance": 1e-10},
                {"name": "plane_wave_phase", "tolerance": 1e-10},
            ],
        }),
        merge(trapped(256), json!({
            "name": "thm21_equivalence",
            "description": "The hydrodynamic system and the Schrödinger equation agree on density and velocity potential.",
            "integrator": {"solver": "madelung", "dt": 1e-4, "T": 0.5, "snapshot_stride": 500},
            "checks": [
                {"name": "mass", "tolerance": 1e-8},
                {"name": "density_equivalence", "tolerance": 1e-3},
                {"name": "velocity_equivalence", "tolerance": 1e-3},
                {"name": "energy_drift", "tolerance": 1e-4},
            ],
        })),
        merge(trapped(128), json!({
            "name": "thm44_hamiltonian",
            "description": "The Schrödinger energy equals the Wasserstein Hamiltonian of the polar decomposition along the flow.",
            "integrator": {"solver": "schrodinger", "dt": 1e-3, "T": 1.0, "snapshot_stride": 100},
            "checks": [
                {"name": "hamiltonian_transport", "tolerance": 1e-10},
                {"name": "energy_drift", "tolerance": 1e-6},
            ],
        })),
        merge(trapped(128), json!({
            "name": "submersion_pullback",
            "description": "The complex symplectic form pulled back through the section equals the Wasserstein form over ħ.",
            "integrator": {"solver": "schrodinger", "dt": 1e-3, "T": 0.2, "snapshot_stride": 100},
            "checks": [{"name": "submersion_pullback", "tolerance": 1e-4, "seed": 7}],
        })),
        json!({
            "name": "heat_entropy_dissipation",
            "description": "Along the heat flow the entropy decreases at the rate given by the Fisher information.",
            "grid": {"n": 128},
            "potential": {"kind": "none"},
            "initial_state": {
                "kind": "polar_pair",
                "density": {"kind": "gaussian", "center": std::f64::consts::PI, "sigma": 0.5, "pedestal": 1e-3},
            },
            "integrator": {"solver": "heat", "dt": 1e-3, "T": 0.2, "snapshot_stride": 1},
            "checks": [
                {"name": "mass", "tolerance": 1e-10},
                {"name": "entropy_dissipation", "tolerance": 1e-4},
            ],
        }),
        json!({
            "name": "dlss_descent",
            "description": "The fourth-order gradient flow of F never increases F.",
            "grid": {"n": 32},
            "potential": {"kind": "none"},
            "initial_state": {
                "kind": "polar_pair",
                "density": {"kind": "fourier", "terms": [{"mode": 1, "sin": 0.0, "cos": 0.4}, {"mode": 2, "sin": 0.2, "cos": 0.0}]},
            },
            "integrator": {"solver": "dlss", "dt": 5e-4, "T": 1.0, "snapshot_stride": 20},
            "checks": [
                {"name": "mass", "tolerance": 1e-10},
                {"name": "descent", "tolerance": 1e-10},
            ],
        }),
        json!({
            "name": "benamou_brenier_action",
            "description": "The displacement interpolation between two densities has constant speed and action equal to the squared distance.",
            "grid": {"n": 256},
            "potential": {"kind": "none"},
            "initial_state": {
                "kind": "polar_pair",
                "density": {"kind": "gaussian", "center": 2.5, "sigma": 0.2, "pedestal": 1e-9},
            },
            "integrator": {
                "solver": "displacement",
                "dt": 0.015625,
                "T": 1.0,
                "target": {"kind": "gaussian", "center": 3.5, "sigma": 0.3, "pedestal": 1e-9},
            },
            "checks": [
                {"name": "mass", "tolerance": 1e-8},
                {"name": "constant_speed", "tolerance": 1e-4},
                {"name": "benamou_brenier", "tolerance": 1e-3},
            ],
        }),
        merge(trapped(256), json!({
            "name": "newton_residual",
            "description": "Hydrodynamic trajectories satisfy Newton's law: covariant acceleration equals minus the gradient of F.",
            "integrator": {"solver": "madelung", "dt": 1e-4, "T": 0.5, "snapshot_stride": 5},
            "checks": [{"name": "newton_residual", "tolerance": 1e-3}],
            "output": {"field_stride": 50},
        })),
        merge(trapped(128), json!({
            "name": "phase_correction",
            "description": "Adding the accumulated Lagrangian to the mean-zero phase recovers the solver's gauge constant.",
            "integrator": {"solver": "madelung", "dt": 1e-4, "T": 0.2, "snapshot_stride": 20},
            "checks": [{"name": "phase_correction", "tolerance": 1e-4}],
        })),
    ]
}

fn from_document(doc: Value) -> ScenarioConfig {
    let doc = merge(json!({"schema": super::config::SCHEMA_VERSION, "constants": {"hbar": 1.0}}), doc);
    serde_json::from_value(doc).expect("built-in scenario parses")
}

/// Built-in scenarios in their fixed suite order.
pub fn list_scenarios() -> Vec<ScenarioConfig> {
    documents().into_iter().map(from_document).collect()
}

pub fn builtin(name: &str) -> Result<ScenarioConfig> {
    list_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::Config(format!("no built-in scenario named `{name}`")))
}

/// Runs every built-in scenario into `out_root/<name>` with up to `jobs`
/// worker threads. Outcomes come back in suite order.
pub fn run_suite(out_root: &Path, jobs: usize) -> Result<Vec<ScenarioOutcome>> {
    let scenarios = list_scenarios();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<ScenarioOutcome>>>> = Mutex::new(vec![None; scenarios.len()]);
    thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, scenarios.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(config) = scenarios.get(k) else { break };
                let outcome = run_scenario(config, &out_root.join(&config.name));
                slots.lock().expect("suite slots")[k] = Some(outcome);
            });
        }
    });
    slots
        .into_inner()
        .expect("suite slots")
        .into_iter()
        .map(|s| s.expect("every scenario ran"))
        .collect()
}
