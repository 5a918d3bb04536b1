use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use super::config::{CheckConfig, CheckKind, InitialStateConfig, OutputFormat, ScenarioConfig, Solver};
use crate::dynamics::{
    dlss_evolve, heat_evolve, madelung_evolve, schrodinger_evolve, Observables, Schedule, State, TrajectoryRecord,
};
use crate::error::{Error, Result};
use crate::fields::{DensityField, PhaseField, PhysicsConstants, PotentialField, WaveField};
use crate::grid::{Grid, RealField};
use crate::madelung::{
    distance_modulo_phase, hamiltonian_hs, madelung_transform, phase_correction, symplectic_form_c, tau_pushforward,
    tau_section,
};
use crate::states;
use crate::transport::{displacement_interpolation, path_action, w2_distance, DEFAULT_LADDER};
use crate::wgeom::{
    covariant_acceleration, hamiltonian_hf, symplectic_form_w, wasserstein_gradient, GradientKind,
    StandardVectorFieldSpec, TangentBundlePoint, TangentVector,
};

pub const OBSERVABLES_FILE: &str = "observables.csv";
pub const SNAPSHOTS_FILE: &str = "snapshots.json";
pub const SUMMARY_FILE: &str = "summary.json";

/// Step of the central differences taken along the tangent-lift curves.
const PULLBACK_STEP: f64 = 1e-4;
const PULLBACK_PAIRS: usize = 4;

/// Everything a scenario run produced, before it is written out.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub trajectory: TrajectoryRecord,
    /// Effective time step after refinement.
    pub dt: f64,
    pub residuals: Vec<CheckSeries>,
}

/// Per-row residuals of one check; `None` where the check is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckSeries {
    pub check: CheckConfig,
    pub values: Vec<Option<f64>>,
}

impl CheckSeries {
    pub fn max(&self) -> Option<f64> {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
    }

    pub fn passed(&self) -> bool {
        self.max().is_some_and(|m| m <= self.check.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub tolerance: f64,
    pub max_residual: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioOutcome {
    pub scenario: String,
    pub schema: u32,
    pub solver: Solver,
    pub dt: Option<f64>,
    pub passed: bool,
    pub checks: Vec<CheckSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_observables: Option<Observables>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<String>,
    #[serde(skip)]
    pub directory: PathBuf,
}

struct Context {
    grid: Grid,
    constants: PhysicsConstants,
    potential: PotentialField,
}

fn solve(config: &ScenarioConfig, ctx: &Context, schedule: &Schedule) -> Result<TrajectoryRecord> {
    let (grid, c, v) = (&ctx.grid, &ctx.constants, &ctx.potential);
    match config.integrator.solver {
        Solver::Schrodinger => schrodinger_evolve(&config.build_wave(grid, c)?, v, c, schedule),
        Solver::Madelung => {
            let (mu, s) = hydro_initial(config, ctx)?;
            madelung_evolve(&mu, &s, v, c, schedule)
        }
        Solver::Heat => heat_evolve(&config.build_density(grid)?, schedule),
        Solver::Dlss => dlss_evolve(&config.build_density(grid)?, v, c, schedule),
        Solver::Displacement => {
            let target = config
                .integrator
                .target
                .as_ref()
                .ok_or_else(|| Error::Config("missing displacement target".into()))?
                .build(grid)?;
            displacement_trajectory(&config.build_density(grid)?, &target, v, c, schedule)
        }
    }
}

/// `σ` of the initial wave function, so both pictures start from one state.
fn hydro_initial(config: &ScenarioConfig, ctx: &Context) -> Result<(DensityField, RealField)> {
    let psi = config.build_wave(&ctx.grid, &ctx.constants)?;
    let (polar, _) = madelung_transform(&psi, &ctx.constants)?;
    Ok((polar.density, polar.phase.into_field()))
}

fn displacement_trajectory(
    mu: &DensityField,
    nu: &DensityField,
    v: &PotentialField,
    c: &PhysicsConstants,
    schedule: &Schedule,
) -> Result<TrajectoryRecord> {
    let steps = schedule.steps()?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut observables = Vec::new();
    for step in 0..=steps {
        if step % schedule.snapshot_stride != 0 && step != steps {
            continue;
        }
        let t = (step as f64 * schedule.dt).min(1.0);
        let rho = displacement_interpolation(mu, nu, t)?;
        let f = crate::fields::functionals(&rho, v, c)?;
        observables.push(Observables {
            mass: rho.field().integrate(),
            hamiltonian_s: None,
            hamiltonian_f: Some(f.free_energy),
            entropy: Some(f.entropy),
            fisher: Some(f.fisher),
            lagrangian: None,
            gauge_constant: 0.0,
        });
        states.push(State::Density(rho));
        times.push(t);
    }
    TrajectoryRecord::new(times, states, observables)
}

fn final_change(a: &Observables, b: &Observables) -> f64 {
    let pairs = [
        (Some(a.mass), Some(b.mass)),
        (a.hamiltonian_s, b.hamiltonian_s),
        (a.hamiltonian_f, b.hamiltonian_f),
        (a.entropy, b.entropy),
        (a.fisher, b.fisher),
        (a.lagrangian, b.lagrangian),
        (Some(a.gauge_constant), Some(b.gauge_constant)),
    ];
    pairs
        .iter()
        .filter_map(|p| match p {
            (Some(x), Some(y)) => Some((x - y).abs()),
            _ => None,
        })
        .fold(0.0, f64::max)
}

/// Runs the solver and evaluates the checks without touching the filesystem.
pub fn execute(config: &ScenarioConfig) -> Result<ScenarioRun> {
    config.validate()?;
    let grid = config.build_grid()?;
    let ctx = Context {
        constants: config.build_constants()?,
        potential: config.build_potential(&grid)?,
        grid,
    };
    let integ = &config.integrator;
    let mut schedule = Schedule::new(integ.dt, integ.t_final, integ.snapshot_stride)?;
    let mut trajectory = solve(config, &ctx, &schedule)?;
    if let Some(refine) = integ.refine {
        // halve dt (keeping snapshot times) until the final observables settle
        for _ in 0..refine.max_halvings {
            let finer = Schedule::new(schedule.dt / 2.0, schedule.t_final, schedule.snapshot_stride * 2)?;
            let next = solve(config, &ctx, &finer)?;
            let change = final_change(trajectory.last().2, next.last().2);
            schedule = finer;
            trajectory = next;
            if change < refine.tolerance {
                break;
            }
        }
    }
    let mut residuals = Vec::with_capacity(config.checks.len());
    for check in &config.checks {
        let values = evaluate_check(check, config, &ctx, &schedule, &trajectory).map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Stability(format!("check {} failed to evaluate: {other}", check.name.name())),
        })?;
        residuals.push(CheckSeries { check: *check, values });
    }
    Ok(ScenarioRun {
        config: config.clone(),
        trajectory,
        dt: schedule.dt,
        residuals,
    })
}

fn l2(a: &[f64], b: &[f64], h: f64) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() * h).sqrt()
}

fn wave(state: &State) -> Result<&WaveField> {
    match state {
        State::Wave(psi) => Ok(psi),
        _ => Err(Error::InvalidArgument("expected a wave-function trajectory".into())),
    }
}

fn hydro(state: &State) -> Result<(&DensityField, &PhaseField)> {
    match state {
        State::Hydro { density, phase } => Ok((density, phase)),
        _ => Err(Error::InvalidArgument("expected a hydrodynamic trajectory".into())),
    }
}

/// `(μ, S)` of any state with a phase, the wave case through `σ`.
fn polar(state: &State, c: &PhysicsConstants) -> Result<(DensityField, RealField)> {
    match state {
        State::Wave(psi) => {
            let (p, _) = madelung_transform(psi, c)?;
            Ok((p.density, p.phase.into_field()))
        }
        State::Hydro { density, phase } => Ok((density.clone(), phase.field().clone())),
        State::Density(_) => Err(Error::InvalidArgument("density-only state carries no phase".into())),
    }
}

fn free_packet(grid: &Grid, center: f64, sigma0: f64, hbar: f64, t: f64) -> Vec<f64> {
    let a = Complex64::new(1.0, hbar * t / (2.0 * sigma0 * sigma0));
    let images = (6.0 * sigma0 * a.norm() / grid.length()).ceil() as i64 + 2;
    let raw: Vec<f64> = grid
        .points()
        .iter()
        .map(|&x| {
            (-images..=images)
                .map(|m| {
                    let d = x - center + m as f64 * grid.length();
                    (-d * d / (4.0 * sigma0 * sigma0 * a)).exp() / a.sqrt()
                })
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect();
    let mass: f64 = raw.iter().sum::<f64>() * grid.spacing();
    raw.into_iter().map(|r| r / mass).collect()
}

fn counterpart(config: &ScenarioConfig, ctx: &Context, schedule: &Schedule) -> Result<TrajectoryRecord> {
    let mut other = config.clone();
    other.integrator.solver = match config.integrator.solver {
        Solver::Schrodinger => Solver::Madelung,
        Solver::Madelung => Solver::Schrodinger,
        s => return Err(Error::Config(format!("no counterpart for the {s:?} solver"))),
    };
    solve(&other, ctx, schedule)
}

fn evaluate_check(
    check: &CheckConfig,
    config: &ScenarioConfig,
    ctx: &Context,
    schedule: &Schedule,
    traj: &TrajectoryRecord,
) -> Result<Vec<Option<f64>>> {
    let (grid, c, v) = (&ctx.grid, &ctx.constants, &ctx.potential);
    let obs = traj.observables();
    let states = traj.states();
    let times = traj.times();
    let rows = traj.len();
    let h = grid.spacing();
    let interval = schedule.dt * schedule.snapshot_stride as f64;
    let solver = config.integrator.solver;
    let all = |f: &dyn Fn(usize) -> Result<f64>| -> Result<Vec<Option<f64>>> { (0..rows).map(|k| f(k).map(Some)).collect() };
    match check.name {
        CheckKind::Mass => all(&|k| Ok((obs[k].mass - 1.0).abs())),
        CheckKind::EnergyDrift => {
            let pick = |o: &Observables| match solver {
                Solver::Schrodinger => o.hamiltonian_s,
                _ => o.hamiltonian_f,
            };
            let h0 = pick(&obs[0]).ok_or_else(|| Error::InvalidArgument("initial energy undefined".into()))?;
            all(&|k| {
                let e = pick(&obs[k]).ok_or_else(|| Error::InvalidArgument("energy undefined".into()))?;
                Ok((e - h0).abs() / h0.abs().max(f64::MIN_POSITIVE))
            })
        }
        CheckKind::Stationarity => all(&|k| match (&states[0], &states[k]) {
            (State::Wave(a), State::Wave(b)) => distance_modulo_phase(a, b),
            (State::Hydro { density: m0, phase: s0 }, State::Hydro { density, phase }) => {
                Ok(l2(density.values(), m0.values(), h).max(l2(phase.values(), s0.values(), h)))
            }
            (a, b) => Ok(l2(b.density()?.values(), a.density()?.values(), h)),
        }),
        CheckKind::PlaneWavePhase => {
            let InitialStateConfig::PlaneWave { k: mode } = config.initial_state else {
                return Err(Error::Config("plane_wave_phase needs a plane wave".into()));
            };
            let psi0 = wave(&states[0])?;
            all(&|k| {
                let rot = Complex64::from_polar(1.0, -c.hbar() * (mode * mode) as f64 * times[k] / 2.0);
                Ok(wave(&states[k])?
                    .values()
                    .iter()
                    .zip(psi0.values())
                    .map(|(a, b)| (a - b * rot).norm())
                    .fold(0.0, f64::max))
            })
        }
        CheckKind::FreePacket => {
            let InitialStateConfig::Gaussian { center, sigma, .. } = config.initial_state else {
                return Err(Error::Config("free_packet needs a gaussian".into()));
            };
            all(&|k| {
                let exact = free_packet(grid, center, sigma, c.hbar(), times[k]);
                Ok(l2(wave(&states[k])?.modulus_squared().values(), &exact, h))
            })
        }
        CheckKind::DensityEquivalence => {
            let other = counterpart(config, ctx, schedule)?;
            all(&|k| {
                let a = states[k].density()?;
                let b = other.states()[k].density()?;
                Ok(l2(a.values(), b.values(), h))
            })
        }
        CheckKind::VelocityEquivalence => {
            let other = counterpart(config, ctx, schedule)?;
            all(&|k| {
                let (ma, sa) = polar(&states[k], c)?;
                let (mb, sb) = polar(&other.states()[k], c)?;
                let za = PhaseField::mean_zero(sa, &ma)?;
                let zb = PhaseField::mean_zero(sb, &mb)?;
                Ok(l2(za.values(), zb.values(), h))
            })
        }
        CheckKind::HamiltonianTransport => all(&|k| {
            let (hs, hf) = match &states[k] {
                State::Wave(psi) => {
                    let (mu, s) = polar(&states[k], c)?;
                    (hamiltonian_hs(psi, v, c)?, hamiltonian_hf(&TangentBundlePoint::new(mu, s)?, v, c)?)
                }
                State::Hydro { density, phase } => {
                    let psi = tau_section(density, &phase.to_pinned(0.0)?, 0.0, c)?;
                    let point = TangentBundlePoint::new(density.clone(), phase.field().clone())?;
                    (hamiltonian_hs(&psi, v, c)?, hamiltonian_hf(&point, v, c)?)
                }
                State::Density(_) => return Err(Error::InvalidArgument("no phase".into())),
            };
            Ok((hs - hf).abs() / hs.abs().max(f64::MIN_POSITIVE))
        }),
        CheckKind::SubmersionPullback => {
            let mut rng = states::rng(check.seed);
            let mut random = || states::random_trig_field(grid, &mut rng, 3, 0.5);
            let mut pairs = Vec::with_capacity(PULLBACK_PAIRS);
            for _ in 0..PULLBACK_PAIRS {
                let a = StandardVectorFieldSpec { psi: random()?, phi: random()? };
                let b = StandardVectorFieldSpec { psi: random()?, phi: random()? };
                pairs.push((a, b));
            }
            all(&|k| {
                let (mu, s) = polar(&states[k], c)?;
                let base = TangentBundlePoint::new(mu, s)?;
                let mut worst: f64 = 0.0;
                for (a, b) in &pairs {
                    let ta = tau_pushforward(&base, a, 0.0, c, PULLBACK_STEP)?;
                    let tb = tau_pushforward(&base, b, 0.0, c, PULLBACK_STEP)?;
                    let lhs = symplectic_form_c(&ta, &tb)?;
                    let rhs = symplectic_form_w(&base, a, b)? / c.hbar();
                    worst = worst.max((lhs - rhs).abs());
                }
                Ok(worst)
            })
        }
        CheckKind::EntropyDissipation => {
            let uniform_times = times.windows(2).all(|w| ((w[1] - w[0]) - interval).abs() < 1e-9 * interval);
            if !uniform_times {
                return Err(Error::Config("entropy_dissipation needs snapshot times on a uniform ladder".into()));
            }
            (0..rows)
                .map(|k| {
                    if k == 0 || k + 1 == rows {
                        return Ok(None);
                    }
                    let ent = |i: usize| obs[i].entropy.ok_or_else(|| Error::InvalidArgument("entropy undefined".into()));
                    let fisher = obs[k].fisher.ok_or_else(|| Error::InvalidArgument("fisher undefined".into()))?;
                    let rate = (ent(k + 1)? - ent(k - 1)?) / (2.0 * interval);
                    Ok(Some((rate + fisher).abs() / fisher))
                })
                .collect()
        }
        CheckKind::Descent => (0..rows)
            .map(|k| {
                if k == 0 {
                    return Ok(None);
                }
                let f = |i: usize| obs[i].hamiltonian_f.ok_or_else(|| Error::InvalidArgument("F undefined".into()));
                Ok(Some((f(k)? - f(k - 1)?).max(0.0)))
            })
            .collect(),
        CheckKind::ConstantSpeed => {
            let first = states[0].density()?;
            let last = states[rows - 1].density()?;
            let total = w2_distance(&first, &last, DEFAULT_LADDER)?;
            all(&|k| {
                let d = w2_distance(&first, &states[k].density()?, DEFAULT_LADDER)?;
                Ok((d - times[k] * total).abs())
            })
        }
        CheckKind::BenamouBrenier => {
            let path = traj.densities()?;
            let action = path_action(&path, interval)?;
            let w2 = w2_distance(&path[0], &path[rows - 1], DEFAULT_LADDER)?;
            let mut out = vec![None; rows];
            out[rows - 1] = Some((action / (w2 * w2) - 1.0).abs());
            Ok(out)
        }
        CheckKind::NewtonResidual => (0..rows)
            .map(|k| {
                if k == 0 || k + 1 == rows {
                    return Ok(None);
                }
                let (mu, s) = hydro(&states[k])?;
                let (_, before) = hydro(&states[k - 1])?;
                let (_, after) = hydro(&states[k + 1])?;
                let accel = covariant_acceleration([before.field(), s.field(), after.field()], mu, interval)?;
                let grad = wasserstein_gradient(GradientKind::TotalF, mu, v, c)?;
                let sum = accel.potential().zip_map(grad.potential(), |a, b| a + b)?;
                let residual = TangentVector::from_potential(mu.clone(), sum)?.norm();
                let scale = accel.norm().min(grad.norm());
                Ok(Some(residual / scale.max(f64::MIN_POSITIVE)))
            })
            .collect(),
        CheckKind::PhaseCorrection => {
            let mut phases = Vec::with_capacity(rows);
            let mut densities = Vec::with_capacity(rows);
            for st in states {
                let (mu, s) = hydro(st)?;
                phases.push(s.clone());
                densities.push(mu.clone());
            }
            let corrected = phase_correction(&phases, &densities, v, c, interval)?;
            let start = densities[0].expectation(corrected[0].field())?;
            all(&|k| {
                let moved = densities[k].expectation(corrected[k].field())? - start;
                Ok(((obs[k].gauge_constant - obs[0].gauge_constant) - moved).abs())
            })
        }
    }
}

/// 17 significant digits, enough to round-trip every `f64`.
fn number(v: f64) -> String {
    format!("{v:.16e}")
}

fn cell(v: Option<f64>) -> String {
    v.map(number).unwrap_or_default()
}

impl ScenarioRun {
    pub fn observables_csv(&self) -> String {
        let mut out = String::from("time,mass,H_S,H_F,entropy,fisher,L_F,gauge_constant");
        for r in &self.residuals {
            out.push_str(",residual_");
            out.push_str(r.check.name.name());
        }
        out.push('\n');
        for (k, (t, o)) in self.trajectory.times().iter().zip(self.trajectory.observables()).enumerate() {
            let mut row = vec![
                number(*t),
                number(o.mass),
                cell(o.hamiltonian_s),
                cell(o.hamiltonian_f),
                cell(o.entropy),
                cell(o.fisher),
                cell(o.lagrangian),
                number(o.gauge_constant),
            ];
            row.extend(self.residuals.iter().map(|r| cell(r.values[k])));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn snapshots_json(&self) -> String {
        #[derive(Serialize)]
        struct Snapshot<'a> {
            time: f64,
            #[serde(skip_serializing_if = "Option::is_none")]
            density: Option<&'a [f64]>,
            #[serde(skip_serializing_if = "Option::is_none")]
            phase: Option<&'a [f64]>,
            #[serde(skip_serializing_if = "Option::is_none")]
            re: Option<Vec<f64>>,
            #[serde(skip_serializing_if = "Option::is_none")]
            im: Option<Vec<f64>>,
        }
        #[derive(Serialize)]
        struct Document<'a> {
            scenario: &'a str,
            n: usize,
            length: f64,
            points: Vec<f64>,
            snapshots: Vec<Snapshot<'a>>,
        }
        let stride = self.config.output.field_stride;
        let last = self.trajectory.len() - 1;
        let snapshots = self
            .trajectory
            .times()
            .iter()
            .zip(self.trajectory.states())
            .enumerate()
            .filter(|(k, _)| k % stride == 0 || *k == last)
            .map(|(_, (t, st))| match st {
                State::Wave(psi) => Snapshot {
                    time: *t,
                    density: None,
                    phase: None,
                    re: Some(psi.values().iter().map(|z| z.re).collect()),
                    im: Some(psi.values().iter().map(|z| z.im).collect()),
                },
                State::Hydro { density, phase } => Snapshot {
                    time: *t,
                    density: Some(density.values()),
                    phase: Some(phase.values()),
                    re: None,
                    im: None,
                },
                State::Density(density) => Snapshot {
                    time: *t,
                    density: Some(density.values()),
                    phase: None,
                    re: None,
                    im: None,
                },
            })
            .collect();
        let grid = match &self.trajectory.states()[0] {
            State::Wave(psi) => psi.grid(),
            State::Hydro { density, .. } | State::Density(density) => density.grid(),
        };
        serde_json::to_string(&Document {
            scenario: &self.config.name,
            n: grid.n(),
            length: grid.length(),
            points: grid.points(),
            snapshots,
        })
        .expect("snapshots serialize")
    }

    pub fn outcome(&self, directory: PathBuf) -> ScenarioOutcome {
        let checks: Vec<CheckSummary> = self
            .residuals
            .iter()
            .map(|r| CheckSummary {
                name: r.check.name.name().to_string(),
                tolerance: r.check.tolerance,
                max_residual: r.max(),
                passed: r.passed(),
            })
            .collect();
        let failed = checks.iter().find(|c| !c.passed).map(|c| c.name.clone());
        ScenarioOutcome {
            scenario: self.config.name.clone(),
            schema: self.config.schema,
            solver: self.config.integrator.solver,
            dt: Some(self.dt),
            passed: failed.is_none(),
            checks,
            final_observables: Some(*self.trajectory.last().2),
            error: None,
            failed_stage: failed,
            directory,
        }
    }
}

fn write(dir: &Path, file: &str, contents: &str) -> Result<()> {
    fs::write(dir.join(file), contents).map_err(|e| Error::Io(format!("{}: {e}", dir.join(file).display())))
}

/// Validates, runs and writes the artifacts of one scenario into `directory`.
///
/// Invalid configurations fail before anything is written.  Solver failures
/// are reported in `summary.json` and in the returned outcome.
pub fn run_scenario(config: &ScenarioConfig, directory: &Path) -> Result<ScenarioOutcome> {
    config.validate()?;
    let result = execute(config);
    fs::create_dir_all(directory).map_err(|e| Error::Io(format!("{}: {e}", directory.display())))?;
    let outcome = match result {
        Ok(run) => {
            let formats = &config.output.formats;
            if formats.contains(&OutputFormat::Csv) {
                write(directory, OBSERVABLES_FILE, &run.observables_csv())?;
            }
            if formats.contains(&OutputFormat::Json) {
                write(directory, SNAPSHOTS_FILE, &run.snapshots_json())?;
            }
            run.outcome(directory.to_path_buf())
        }
        Err(e) => ScenarioOutcome {
            scenario: config.name.clone(),
            schema: config.schema,
            solver: config.integrator.solver,
            dt: None,
            passed: false,
            checks: Vec::new(),
            final_observables: None,
            failed_stage: Some(match &e {
                Error::Stability(msg) if msg.starts_with("check ") => {
                    msg.split_whitespace().nth(1).unwrap_or("solver").to_string()
                }
                _ => "solver".to_string(),
            }),
            error: Some(e.to_string()),
            directory: directory.to_path_buf(),
        },
    };
    write(
        directory,
        SUMMARY_FILE,
        &serde_json::to_string_pretty(&outcome).expect("summary serializes"),
    )?;
    Ok(outcome)
}

/// Parses a value written by [`ScenarioRun::observables_csv`].
pub fn parse_cell(text: &str) -> Result<Option<f64>> {
    if text.is_empty() {
        return Ok(None);
    }
    text.parse()
        .map(Some)
        .map_err(|_| Error::Config(format!("`{text}` is not a number")))
}
