use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{normalize_density, DensityField, PhysicsConstants, PotentialField, WaveField};
use crate::grid::{Grid, RealField};
use crate::states;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub grid: GridConfig,
    pub constants: ConstantsConfig,
    pub potential: PotentialConfig,
    pub initial_state: InitialStateConfig,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub checks: Vec<CheckConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(default = "default_length")]
    pub length: f64,
}

fn default_length() -> f64 {
    2.0 * PI
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    pub hbar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    None,
    /// `depth · (1 - cos(2π(x - center)/L))`.
    CosineWell { depth: f64, center: f64 },
    /// One value per grid point.
    CustomTable { values: Vec<f64> },
}

/// One Fourier term `sin · sin(2π mode x/L) + cos · cos(2π mode x/L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub mode: u32,
    #[serde(default)]
    pub sin: f64,
    #[serde(default)]
    pub cos: f64,
}

fn fourier_sum(grid: &Grid, terms: &[FourierTerm]) -> Result<RealField> {
    let base = 2.0 * PI / grid.length();
    RealField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|t| {
                let kx = base * t.mode as f64 * x;
                t.sin * kx.sin() + t.cos * kx.cos()
            })
            .sum()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityProfile {
    Uniform,
    Gaussian {
        center: f64,
        sigma: f64,
        #[serde(default)]
        pedestal: f64,
    },
    /// `μ ∝ 1 + Σ terms`.
    Fourier { terms: Vec<FourierTerm> },
}

impl DensityProfile {
    pub fn build(&self, grid: &Grid) -> Result<DensityField> {
        match self {
            DensityProfile::Uniform => DensityField::uniform(grid),
            DensityProfile::Gaussian {
                center,
                sigma,
                pedestal,
            } => states::wrapped_gaussian_density(grid, *center, *sigma, *pedestal),
            DensityProfile::Fourier { terms } => normalize_density(&fourier_sum(grid, terms)?.map(|v| 1.0 + v)?),
        }
    }

    fn validate(&self) -> Result<()> {
        if let DensityProfile::Gaussian { sigma, pedestal, .. } = self {
            positive("initial_state sigma", *sigma)?;
            if !(*pedestal >= 0.0) {
                return Err(Error::Config(format!("pedestal must be non-negative, got {pedestal}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialStateConfig {
    /// Wrapped Gaussian amplitude with `|Ψ|²` of standard deviation `sigma`.
    Gaussian {
        center: f64,
        sigma: f64,
        #[serde(default)]
        phase: Vec<FourierTerm>,
    },
    PlaneWave { k: i64 },
    /// `√μ e^{iS/ħ}` from a density profile and a phase.
    PolarPair {
        density: DensityProfile,
        #[serde(default)]
        phase: Vec<FourierTerm>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Schrodinger,
    Madelung,
    Heat,
    Dlss,
    /// Samples of the displacement interpolation from the initial density to
    /// `integrator.target`, with `t_final = 1`.
    Displacement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineConfig {
    pub tolerance: f64,
    pub max_halvings: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub solver: Solver,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default = "one")]
    pub snapshot_stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine: Option<RefineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<DensityProfile>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `|mass - 1|`.
    Mass,
    /// Relative drift of `H_S` (Schrödinger) or `H_F` (Madelung).
    EnergyDrift,
    /// Distance to the initial state.
    Stationarity,
    /// Max error against the exact plane-wave phase rotation.
    PlaneWavePhase,
    /// L² density error against the free Gaussian packet.
    FreePacket,
    /// L² density mismatch against the counterpart solver.
    DensityEquivalence,
    /// L² mismatch of mean-zero velocity potentials against the counterpart solver.
    VelocityEquivalence,
    /// `|H_S - H_F∘σ| / |H_S|`.
    HamiltonianTransport,
    /// Worst `|ω_C(τ_*a, τ_*b) - ω_W(a, b)/ħ|` over seeded vector-field pairs.
    SubmersionPullback,
    /// `|dEnt/dt + I| / I` by central differences between snapshots.
    EntropyDissipation,
    /// Increase of `F` between consecutive snapshots.
    Descent,
    /// `|W₂(μ_t, μ_0) - t W₂(μ_1, μ_0)|`.
    ConstantSpeed,
    /// `|action / W₂² - 1|`, reported once on the last row.
    BenamouBrenier,
    /// `‖∇_{μ̇}μ̇ + ∇F‖ / min(‖∇_{μ̇}μ̇‖, ‖∇F‖)`.
    NewtonResidual,
    /// `|Δc(t) - Δ⟨S̄_t, μ_t⟩|` between the solver's gauge constants and the corrected phases.
    PhaseCorrection,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Mass => "mass",
            CheckKind::EnergyDrift => "energy_drift",
            CheckKind::Stationarity => "stationarity",
            CheckKind::PlaneWavePhase => "plane_wave_phase",
            CheckKind::FreePacket => "free_packet",
            CheckKind::DensityEquivalence => "density_equivalence",
            CheckKind::VelocityEquivalence => "velocity_equivalence",
            CheckKind::HamiltonianTransport => "hamiltonian_transport",
            CheckKind::SubmersionPullback => "submersion_pullback",
            CheckKind::EntropyDissipation => "entropy_dissipation",
            CheckKind::Descent => "descent",
            CheckKind::ConstantSpeed => "constant_speed",
            CheckKind::BenamouBrenier => "benamou_brenier",
            CheckKind::NewtonResidual => "newton_residual",
            CheckKind::PhaseCorrection => "phase_correction",
        }
    }

    fn solvers(self) -> &'static [Solver] {
        use Solver::*;
        match self {
            CheckKind::Mass | CheckKind::Stationarity => &[Schrodinger, Madelung, Heat, Dlss, Displacement],
            CheckKind::EnergyDrift | CheckKind::DensityEquivalence | CheckKind::VelocityEquivalence => {
                &[Schrodinger, Madelung]
            }
            CheckKind::HamiltonianTransport | CheckKind::SubmersionPullback => &[Schrodinger, Madelung],
            CheckKind::PlaneWavePhase | CheckKind::FreePacket => &[Schrodinger],
            CheckKind::EntropyDissipation => &[Heat],
            CheckKind::Descent => &[Dlss],
            CheckKind::ConstantSpeed | CheckKind::BenamouBrenier => &[Displacement],
            CheckKind::NewtonResidual | CheckKind::PhaseCorrection => &[Madelung],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub name: CheckKind,
    pub tolerance: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    /// `observables.csv`.
    Csv,
    /// `snapshots.json`.
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
    /// Every `field_stride`-th snapshot is written to `snapshots.json`.
    #[serde(default = "one")]
    pub field_stride: usize,
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: None,
            formats: default_formats(),
            field_stride: 1,
        }
    }
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} must be positive and finite, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `key.path=value` overrides to the JSON form and re-validates.
    /// Values are parsed as JSON, falling back to a plain string.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut doc = serde_json::to_value(self)?;
        for item in overrides {
            let item = item.as_ref();
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{item}` is not key=value")))?;
            let value = serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            let mut slot = &mut doc;
            for part in key.split('.') {
                slot = match slot {
                    serde_json::Value::Object(map) => map.entry(part.to_string()).or_insert(serde_json::Value::Null),
                    serde_json::Value::Array(items) => {
                        let index: usize = part
                            .parse()
                            .map_err(|_| Error::Config(format!("`{part}` in `{key}` is not an index")))?;
                        items
                            .get_mut(index)
                            .ok_or_else(|| Error::Config(format!("index {index} out of range in `{key}`")))?
                    }
                    _ => return Err(Error::Config(format!("`{key}` does not name a config field"))),
                };
            }
            *slot = value;
        }
        let config: Self = serde_json::from_value(doc)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema {}, expected {SCHEMA_VERSION}",
                self.schema
            )));
        }
        if self.name.is_empty() {
            return Err(Error::Config("scenario name is empty".into()));
        }
        positive("grid.length", self.grid.length)?;
        Grid::new(self.grid.n, self.grid.length).map_err(|e| Error::Config(e.to_string()))?;
        positive("constants.hbar", self.constants.hbar)?;
        let integ = &self.integrator;
        positive("integrator.dt", integ.dt)?;
        positive("integrator.T", integ.t_final)?;
        if integ.snapshot_stride == 0 {
            return Err(Error::Config("integrator.snapshot_stride must be positive".into()));
        }
        crate::dynamics::Schedule::new(integ.dt, integ.t_final, integ.snapshot_stride)
            .map_err(|e| Error::Config(e.to_string()))?;
        if let Some(r) = integ.refine {
            positive("integrator.refine.tolerance", r.tolerance)?;
        }
        match (&integ.target, integ.solver) {
            (None, Solver::Displacement) => {
                return Err(Error::Config("the displacement solver needs integrator.target".into()))
            }
            (Some(_), s) if s != Solver::Displacement => {
                return Err(Error::Config("integrator.target is only used by the displacement solver".into()))
            }
            (Some(t), _) => {
                t.validate()?;
                if (integ.t_final - 1.0).abs() > 1e-12 {
                    return Err(Error::Config("the displacement solver runs on T = 1".into()));
                }
            }
            _ => {}
        }
        match &self.potential {
            PotentialConfig::CustomTable { values } if values.len() != self.grid.n => {
                return Err(Error::Config(format!(
                    "custom potential has {} values for {} grid points",
                    values.len(),
                    self.grid.n
                )))
            }
            PotentialConfig::CustomTable { values } if values.iter().any(|v| !v.is_finite()) => {
                return Err(Error::Config("custom potential has non-finite values".into()))
            }
            _ => {}
        }
        match &self.initial_state {
            InitialStateConfig::Gaussian { sigma, .. } => positive("initial_state.sigma", *sigma)?,
            InitialStateConfig::PolarPair { density, .. } => density.validate()?,
            InitialStateConfig::PlaneWave { .. } => {}
        }
        for check in &self.checks {
            positive(&format!("tolerance of check {}", check.name.name()), check.tolerance)?;
            if !check.name.solvers().contains(&integ.solver) {
                return Err(Error::Config(format!(
                    "check {} does not apply to the {:?} solver",
                    check.name.name(),
                    integ.solver
                )));
            }
            let free_gaussian = matches!(self.potential, PotentialConfig::None)
                && matches!(&self.initial_state, InitialStateConfig::Gaussian { phase, .. } if phase.is_empty());
            match check.name {
                CheckKind::FreePacket if !free_gaussian => {
                    return Err(Error::Config(
                        "free_packet needs a zero-phase gaussian initial state and no potential".into(),
                    ))
                }
                CheckKind::PlaneWavePhase
                    if !matches!(self.initial_state, InitialStateConfig::PlaneWave { .. })
                        || !matches!(self.potential, PotentialConfig::None) =>
                {
                    return Err(Error::Config(
                        "plane_wave_phase needs a plane_wave initial state and no potential".into(),
                    ))
                }
                _ => {}
            }
        }
        if self.output.field_stride == 0 {
            return Err(Error::Config("output.field_stride must be positive".into()));
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n, self.grid.length)
    }

    pub fn build_constants(&self) -> Result<PhysicsConstants> {
        PhysicsConstants::new(self.constants.hbar)
    }

    pub fn build_potential(&self, grid: &Grid) -> Result<PotentialField> {
        Ok(match &self.potential {
            PotentialConfig::None => PotentialField::zero(grid),
            PotentialConfig::CosineWell { depth, center } => {
                let base = 2.0 * PI / grid.length();
                PotentialField::new(RealField::from_fn(grid, |x| depth * (1.0 - (base * (x - center)).cos()))?)
            }
            PotentialConfig::CustomTable { values } => PotentialField::new(RealField::new(grid, values.clone())?),
        })
    }

    fn phase_terms(&self) -> &[FourierTerm] {
        match &self.initial_state {
            InitialStateConfig::Gaussian { phase, .. } | InitialStateConfig::PolarPair { phase, .. } => phase,
            InitialStateConfig::PlaneWave { .. } => &[],
        }
    }

    pub fn build_phase(&self, grid: &Grid) -> Result<RealField> {
        fourier_sum(grid, self.phase_terms())
    }

    pub fn build_wave(&self, grid: &Grid, c: &PhysicsConstants) -> Result<WaveField> {
        let phase = self.build_phase(grid)?;
        match &self.initial_state {
            InitialStateConfig::Gaussian { center, sigma, .. } => states::gaussian_wave(grid, *center, *sigma, &phase, c),
            InitialStateConfig::PlaneWave { k } => states::plane_wave(grid, *k),
            InitialStateConfig::PolarPair { density, .. } => states::polar_wave(&density.build(grid)?, &phase, c),
        }
    }

    pub fn build_density(&self, grid: &Grid) -> Result<DensityField> {
        match &self.initial_state {
            InitialStateConfig::Gaussian { center, sigma, .. } => {
                states::wrapped_gaussian_density(grid, *center, *sigma, 0.0)
            }
            InitialStateConfig::PlaneWave { .. } => DensityField::uniform(grid),
            InitialStateConfig::PolarPair { density, .. } => density.build(grid),
        }
    }
}
