//! Time integrators and the trajectory records they produce.
//!
//! * [`schrodinger_evolve`]: Strang split-step Fourier propagation.
//! * [`madelung_evolve`]: the hydrodynamic system for `(μ, S)` by the method
//!   of lines with classical RK4, re-gauging `S` to `⟨S, μ⟩ = 0` after every
//!   step and keeping the removed constants.
//! * [`heat_evolve`]: exact Fourier solution of `∂_t μ = Δμ`.
//! * [`dlss_evolve`]: explicit RK4 descent `μ̇ = div(μ∇δF/δμ)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{
    density_floor, functionals, lagrangian_lf, normalize_density, DensityField, PhaseField,
    PhysicsConstants, PotentialField, WaveField, MASS_TOLERANCE,
};
use crate::grid::{Grid, RealField};
use crate::madelung::{hamiltonian_hs, madelung_transform, tau_section};
use crate::wgeom::{hamiltonian_hf, TangentBundlePoint, TangentVector};

/// Blow-up guard for the explicit Madelung solver.
pub const ENERGY_GROWTH_LIMIT: f64 = 1e3;

/// Allowed increase of `F` between two DLSS steps.
pub const DESCENT_SLACK: f64 = 1e-10;

/// Time step, horizon and snapshot stride.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_stride: usize,
}

impl Schedule {
    pub fn new(dt: f64, t_final: f64, snapshot_stride: usize) -> Result<Self> {
        let s = Self {
            dt,
            t_final,
            snapshot_stride,
        };
        s.steps()?;
        Ok(s)
    }

    /// Number of steps; `t_final` must be a whole multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_final >= self.dt) || !self.t_final.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "T = {} must be at least dt = {}",
                self.t_final, self.dt
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidArgument("snapshot stride must be positive".into()));
        }
        let steps = (self.t_final / self.dt).round();
        if (steps * self.dt - self.t_final).abs() > 1e-9 * self.t_final {
            return Err(Error::InvalidArgument(format!(
                "T = {} is not a multiple of dt = {}",
                self.t_final, self.dt
            )));
        }
        Ok(steps as usize)
    }

    fn records(&self, step: usize, steps: usize) -> bool {
        step % self.snapshot_stride == 0 || step == steps
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Wave(WaveField),
    Hydro { density: DensityField, phase: PhaseField },
    Density(DensityField),
}

impl State {
    pub fn density(&self) -> Result<DensityField> {
        match self {
            State::Wave(psi) => normalize_density(&psi.modulus_squared()),
            State::Hydro { density, .. } | State::Density(density) => Ok(density.clone()),
        }
    }
}

/// Per-snapshot observables. Entries that do not apply to a state (or that
/// need a nodeless wave function the state does not provide) are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    pub mass: f64,
    pub hamiltonian_s: Option<f64>,
    pub hamiltonian_f: Option<f64>,
    pub entropy: Option<f64>,
    pub fisher: Option<f64>,
    pub lagrangian: Option<f64>,
    pub gauge_constant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    times: Vec<f64>,
    states: Vec<State>,
    observables: Vec<Observables>,
}

impl TrajectoryRecord {
    pub fn new(times: Vec<f64>, states: Vec<State>, observables: Vec<Observables>) -> Result<Self> {
        if times.len() != states.len() || times.len() != observables.len() {
            return Err(Error::InvalidArgument(format!(
                "{} times, {} states, {} observables",
                times.len(),
                states.len(),
                observables.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("times must be strictly increasing".into()));
        }
        if let Some(o) = observables.iter().find(|o| (o.mass - 1.0).abs() > MASS_TOLERANCE) {
            return Err(Error::NotNormalized {
                mass: o.mass,
                tolerance: MASS_TOLERANCE,
            });
        }
        Ok(Self {
            times,
            states,
            observables,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn observables(&self) -> &[Observables] {
        &self.observables
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> (&f64, &State, &Observables) {
        let k = self.len() - 1;
        (&self.times[k], &self.states[k], &self.observables[k])
    }

    /// Densities of every snapshot.
    pub fn densities(&self) -> Result<Vec<DensityField>> {
        self.states.iter().map(State::density).collect()
    }
}

fn wave_observables(psi: &WaveField, v: &PotentialField, c: &PhysicsConstants) -> Result<Observables> {
    let mass = psi.field().l2_norm().powi(2);
    let hamiltonian_s = Some(hamiltonian_hs(psi, v, c)?);
    let mut obs = Observables {
        mass,
        hamiltonian_s,
        hamiltonian_f: None,
        entropy: None,
        fisher: None,
        lagrangian: None,
        gauge_constant: 0.0,
    };
    if let Ok(mu) = normalize_density(&psi.modulus_squared()) {
        let f = functionals(&mu, v, c)?;
        obs.entropy = Some(f.entropy);
        obs.fisher = Some(f.fisher);
    }
    if let Ok((polar, tangent)) = madelung_transform(psi, c) {
        let point = TangentBundlePoint::new(polar.density, polar.phase.into_field())?;
        obs.hamiltonian_f = Some(hamiltonian_hf(&point, v, c)?);
        obs.lagrangian = Some(lagrangian_lf(&tangent, v, c)?);
    }
    Ok(obs)
}

/// Strang splitting: half potential kick, exact kinetic phase in Fourier
/// space, half potential kick.
pub fn schrodinger_evolve(
    psi0: &WaveField,
    v: &PotentialField,
    c: &PhysicsConstants,
    schedule: &Schedule,
) -> Result<TrajectoryRecord> {
    psi0.field().same_grid(v.field())?;
    let steps = schedule.steps()?;
    let grid = psi0.grid().clone();
    let hbar = c.hbar();
    let dt = schedule.dt;
    let half_kick: Vec<Complex64> = v
        .field()
        .values()
        .iter()
        .map(|vv| Complex64::from_polar(1.0, -vv * dt / (2.0 * hbar)))
        .collect();
    let drift: Vec<Complex64> = (0..grid.n())
        .map(|j| {
            let k = grid.wavenumber(j);
            Complex64::from_polar(1.0, -hbar * k * k * dt / 2.0)
        })
        .collect();

    let mut times = vec![0.0];
    let mut states = vec![State::Wave(psi0.clone())];
    let mut observables = vec![wave_observables(psi0, v, c)?];
    let mut psi: Vec<Complex64> = psi0.values().to_vec();
    for step in 1..=steps {
        for (z, k) in psi.iter_mut().zip(&half_kick) {
            *z *= k;
        }
        let mut coeffs = grid.forward(&psi);
        for (z, d) in coeffs.iter_mut().zip(&drift) {
            *z *= d;
        }
        psi = grid.inverse(coeffs);
        for (z, k) in psi.iter_mut().zip(&half_kick) {
            *z *= k;
        }
        if schedule.records(step, steps) {
            // roundoff drift of the norm is folded back at every snapshot
            let raw = crate::grid::ComplexField::new(&grid, psi.clone())?;
            let mass = raw.l2_norm().powi(2);
            let wave = WaveField::normalized(raw)?;
            psi.copy_from_slice(wave.values());
            let mut obs = wave_observables(&wave, v, c)?;
            obs.mass = mass;
            observables.push(obs);
            states.push(State::Wave(wave));
            times.push(step as f64 * dt);
        }
    }
    TrajectoryRecord::new(times, states, observables)
}

/// Right-hand side of the hydrodynamic system,
/// `∂_t μ = -∂_x(μ ∂_x S)`, `∂_t S = -(½|∂_x S|² + V + Q₈(μ))`.
struct HydroRhs<'a> {
    grid: &'a Grid,
    potential: &'a [f64],
    quantum: f64,
    floor: f64,
}

impl HydroRhs<'_> {
    fn eval(&self, mu: &[f64], s: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let grid = self.grid;
        if let Some((index, &value)) = mu.iter().enumerate().find(|(_, &m)| !(m > self.floor)) {
            return Err(Error::Node {
                index,
                value,
                floor: self.floor,
            });
        }
        let ds = grid.d1(s);
        let flux: Vec<f64> = mu.iter().zip(&ds).map(|(m, d)| m * d).collect();
        let dmu: Vec<f64> = grid.d1(&grid.dealias(&flux)).into_iter().map(|v| -v).collect();
        let log: Vec<f64> = mu.iter().map(|m| m.ln()).collect();
        let dlog = grid.d1(&log);
        let lap = grid.d2(mu);
        let nonlinear: Vec<f64> = (0..mu.len())
            .map(|j| 0.5 * ds[j] * ds[j] + self.quantum * (dlog[j] * dlog[j] - 2.0 * lap[j] / mu[j]))
            .collect();
        let dealiased = grid.dealias(&nonlinear);
        let dphase = dealiased
            .iter()
            .zip(self.potential)
            .map(|(n, v)| -(n + v))
            .collect();
        Ok((dmu, dphase))
    }
}

fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(u, w)| u + a * w).collect()
}

fn hydro_observables(
    mu: &DensityField,
    s: &PhaseField,
    v: &PotentialField,
    c: &PhysicsConstants,
    gauge_constant: f64,
) -> Result<Observables> {
    let f = functionals(mu, v, c)?;
    let tangent = TangentVector::from_potential(mu.clone(), s.field().clone())?;
    let point = TangentBundlePoint::new(mu.clone(), s.field().clone())?;
    let r = 0.0;
    let psi = tau_section(mu, &s.to_pinned(r)?, r, c)?;
    Ok(Observables {
        mass: mu.field().integrate(),
        hamiltonian_s: Some(hamiltonian_hs(&psi, v, c)?),
        hamiltonian_f: Some(hamiltonian_hf(&point, v, c)?),
        entropy: Some(f.entropy),
        fisher: Some(f.fisher),
        lagrangian: Some(0.5 * tangent.norm_squared() - f.free_energy),
        gauge_constant,
    })
}

/// Method-of-lines RK4 for `(μ, S)`.
///
/// The phase is stored with `⟨S, μ⟩ = 0`; the constants removed at each step
/// are accumulated, so `gauge_constant(t)` is `⟨S, μ⟩` of the un-normalized
/// phase started from `s0` as given.
pub fn madelung_evolve(
    mu0: &DensityField,
    s0: &RealField,
    v: &PotentialField,
    c: &PhysicsConstants,
    schedule: &Schedule,
) -> Result<TrajectoryRecord> {
    mu0.field().same_grid(s0)?;
    mu0.field().same_grid(v.field())?;
    let steps = schedule.steps()?;
    let grid = mu0.grid().clone();
    let dt = schedule.dt;
    let rhs = HydroRhs {
        grid: &grid,
        potential: v.field().values(),
        quantum: c.hbar() * c.hbar() / 8.0,
        floor: density_floor(&grid),
    };

    let mut gauge = mu0.expectation(s0)?;
    let phase0 = PhaseField::mean_zero(s0.clone(), mu0)?;
    let first = hydro_observables(mu0, &phase0, v, c, gauge)?;
    let energy0 = first.hamiltonian_f.unwrap_or(0.0).abs().max(1e-300);
    let mut times = vec![0.0];
    let mut states = vec![State::Hydro {
        density: mu0.clone(),
        phase: phase0.clone(),
    }];
    let mut observables = vec![first];

    let mut mu = mu0.values().to_vec();
    let mut s = phase0.values().to_vec();
    for step in 1..=steps {
        let (k1m, k1s) = rhs.eval(&mu, &s)?;
        let (k2m, k2s) = rhs.eval(&axpy(&mu, 0.5 * dt, &k1m), &axpy(&s, 0.5 * dt, &k1s))?;
        let (k3m, k3s) = rhs.eval(&axpy(&mu, 0.5 * dt, &k2m), &axpy(&s, 0.5 * dt, &k2s))?;
        let (k4m, k4s) = rhs.eval(&axpy(&mu, dt, &k3m), &axpy(&s, dt, &k3s))?;
        for j in 0..mu.len() {
            mu[j] += dt / 6.0 * (k1m[j] + 2.0 * k2m[j] + 2.0 * k3m[j] + k4m[j]);
            s[j] += dt / 6.0 * (k1s[j] + 2.0 * k2s[j] + 2.0 * k3s[j] + k4s[j]);
        }
        let density = DensityField::new(RealField::new(&grid, mu.clone())?)?;
        let shift = density.expectation(&RealField::new(&grid, s.clone())?)?;
        gauge += shift;
        s.iter_mut().for_each(|x| *x -= shift);

        if schedule.records(step, steps) {
            let phase = PhaseField::mean_zero(RealField::new(&grid, s.clone())?, &density)?;
            let obs = hydro_observables(&density, &phase, v, c, gauge)?;
            let energy = obs.hamiltonian_f.unwrap_or(0.0).abs();
            if !energy.is_finite() || energy > ENERGY_GROWTH_LIMIT * energy0.max(1.0) {
                return Err(Error::Stability(format!(
                    "H_F grew from {energy0:e} to {energy:e} by t = {}",
                    step as f64 * dt
                )));
            }
            observables.push(obs);
            states.push(State::Hydro { density, phase });
            times.push(step as f64 * dt);
        }
    }
    TrajectoryRecord::new(times, states, observables)
}

fn density_observables(mu: &DensityField, v: &PotentialField, c: &PhysicsConstants) -> Result<Observables> {
    let f = functionals(mu, v, c)?;
    Ok(Observables {
        mass: mu.field().integrate(),
        hamiltonian_s: None,
        hamiltonian_f: Some(f.free_energy),
        entropy: Some(f.entropy),
        fisher: Some(f.fisher),
        lagrangian: Some(-f.free_energy),
        gauge_constant: 0.0,
    })
}

/// Exact solution `μ̂_k(t) = μ̂_k(0) e^{-κ² t}` of the heat equation at the
/// snapshot times of `schedule`.
pub fn heat_evolve(mu0: &DensityField, schedule: &Schedule) -> Result<TrajectoryRecord> {
    let steps = schedule.steps()?;
    let grid = mu0.grid().clone();
    let zero = PotentialField::zero(&grid);
    let c = PhysicsConstants::default();
    let data: Vec<Complex64> = mu0.values().iter().map(|&m| Complex64::new(m, 0.0)).collect();
    let coeffs = grid.forward(&data);
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut observables = Vec::new();
    for step in 0..=steps {
        if !schedule.records(step, steps) {
            continue;
        }
        let t = step as f64 * schedule.dt;
        let decayed = coeffs
            .iter()
            .enumerate()
            .map(|(j, z)| {
                let k = grid.wavenumber(j);
                z * (-k * k * t).exp()
            })
            .collect();
        let values = grid.inverse(decayed).into_iter().map(|z| z.re).collect();
        let mu = DensityField::new(RealField::new(&grid, values)?)?;
        observables.push(density_observables(&mu, &zero, &c)?);
        states.push(State::Density(mu));
        times.push(t);
    }
    TrajectoryRecord::new(times, states, observables)
}

/// `μ̇ = -ψ` for the Wasserstein gradient `ψ = -div(μ∇(V + (ħ²/8)δI/δμ))`.
fn dlss_rhs(grid: &Grid, mu: &[f64], v: &[f64], quantum: f64, floor: f64) -> Result<Vec<f64>> {
    if let Some((index, &value)) = mu.iter().enumerate().find(|(_, &m)| !(m > floor)) {
        return Err(Error::Node { index, value, floor });
    }
    let log: Vec<f64> = mu.iter().map(|m| m.ln()).collect();
    let dlog = grid.d1(&log);
    let lap = grid.d2(mu);
    let variation: Vec<f64> = (0..mu.len())
        .map(|j| dlog[j] * dlog[j] - 2.0 * lap[j] / mu[j])
        .collect();
    let generator: Vec<f64> = grid
        .dealias(&variation)
        .iter()
        .zip(v)
        .map(|(f, vv)| vv + quantum * f)
        .collect();
    let flux: Vec<f64> = grid.d1(&generator).iter().zip(mu).map(|(g, m)| g * m).collect();
    Ok(grid.d1(&grid.dealias(&flux)))
}

/// Explicit RK4 descent of `F(μ) = ⟨V, μ⟩ + (ħ²/8)I(μ)`; every step must
/// lower `F` (up to [`DESCENT_SLACK`]).
pub fn dlss_evolve(
    mu0: &DensityField,
    v: &PotentialField,
    c: &PhysicsConstants,
    schedule: &Schedule,
) -> Result<TrajectoryRecord> {
    mu0.field().same_grid(v.field())?;
    let steps = schedule.steps()?;
    let grid = mu0.grid().clone();
    let dt = schedule.dt;
    let quantum = c.hbar() * c.hbar() / 8.0;
    let floor = density_floor(&grid);
    let vv = v.field().values();

    let mut times = vec![0.0];
    let mut states = vec![State::Density(mu0.clone())];
    let first = density_observables(mu0, v, c)?;
    let mut free = first.hamiltonian_f.unwrap_or(0.0);
    let mut observables = vec![first];
    let mut mu = mu0.values().to_vec();
    for step in 1..=steps {
        let k1 = dlss_rhs(&grid, &mu, vv, quantum, floor)?;
        let k2 = dlss_rhs(&grid, &axpy(&mu, 0.5 * dt, &k1), vv, quantum, floor)?;
        let k3 = dlss_rhs(&grid, &axpy(&mu, 0.5 * dt, &k2), vv, quantum, floor)?;
        let k4 = dlss_rhs(&grid, &axpy(&mu, dt, &k3), vv, quantum, floor)?;
        for j in 0..mu.len() {
            mu[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let density = DensityField::new(RealField::new(&grid, mu.clone())?)?;
        let next = functionals(&density, v, c)?.free_energy;
        if next > free + DESCENT_SLACK {
            return Err(Error::Stability(format!(
                "F increased from {free} to {next} at t = {}",
                step as f64 * dt
            )));
        }
        free = next;
        if schedule.records(step, steps) {
            observables.push(density_observables(&density, v, c)?);
            states.push(State::Density(density));
            times.push(step as f64 * dt);
        }
    }
    TrajectoryRecord::new(times, states, observables)
}
