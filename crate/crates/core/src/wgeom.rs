//! Riemannian calculus on the space of densities with the Wasserstein
//! metric: velocity potentials, the tangent metric, gradients of the
//! standard functionals, the canonical symplectic form on the tangent
//! bundle and the Hamiltonian `H_F` with its vector field.
//!
//! A tangent vector at `μ` is stored through its velocity potential `φ`,
//! normalized by `⟨φ, μ⟩ = 0`; the density variation it represents is the
//! divergence form `ψ = -div(μ∇φ)`.

use crate::error::{Error, Result};
use crate::fields::{functionals, DensityField, PhysicsConstants, PotentialField};
use crate::grid::RealField;

/// Element of `T_μ𝒫`, stored as the gauge-fixed velocity potential.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: DensityField,
    potential: RealField,
}

impl TangentVector {
    /// Builds `-div(μ∇φ)`; `φ` is shifted so that `⟨φ, μ⟩ = 0`.
    pub fn from_potential(base: DensityField, potential: RealField) -> Result<Self> {
        base.field().same_grid(&potential)?;
        let mean = base.expectation(&potential)?;
        let potential = potential.map(|v| v - mean)?;
        Ok(Self { base, potential })
    }

    pub fn zero(base: DensityField) -> Result<Self> {
        let potential = RealField::constant(base.grid(), 0.0)?;
        Ok(Self { base, potential })
    }

    pub fn base(&self) -> &DensityField {
        &self.base
    }

    pub fn potential(&self) -> &RealField {
        &self.potential
    }

    /// `∇φ`.
    pub fn velocity(&self) -> RealField {
        RealField::new(self.base.grid(), self.base.grid().d1(self.potential.values()))
            .expect("finite velocity")
    }

    /// `ψ = -div(μ∇φ)`, with the product dealiased before differentiation.
    pub fn divergence_form(&self) -> RealField {
        let grid = self.base.grid();
        let flux: Vec<f64> = grid
            .d1(self.potential.values())
            .iter()
            .zip(self.base.values())
            .map(|(v, m)| v * m)
            .collect();
        let div = grid.d1(&grid.dealias(&flux));
        RealField::new(grid, div.into_iter().map(|v| -v).collect()).expect("finite divergence")
    }

    /// `‖ψ‖² = ∫ |∇φ|² dμ`.
    pub fn norm_squared(&self) -> f64 {
        let v = self.velocity();
        weighted_inner(&self.base, &v, &v)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }
}

fn weighted_inner(mu: &DensityField, a: &RealField, b: &RealField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .zip(mu.values())
        .map(|((x, y), m)| x * y * m)
        .sum::<f64>()
        * mu.grid().spacing()
}

/// `⟨∇a, ∇b⟩_μ`.
fn metric_pairing(mu: &DensityField, a: &RealField, b: &RealField) -> Result<f64> {
    a.same_grid(b)?;
    mu.field().same_grid(a)?;
    let grid = mu.grid();
    let da = RealField::new(grid, grid.d1(a.values()))?;
    let db = RealField::new(grid, grid.d1(b.values()))?;
    Ok(weighted_inner(mu, &da, &db))
}

/// Point `-div(μ∇f)` of the tangent bundle, with a gauge-free fiber potential.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentBundlePoint {
    pub base: DensityField,
    pub fiber_potential: RealField,
}

impl TangentBundlePoint {
    pub fn new(base: DensityField, fiber_potential: RealField) -> Result<Self> {
        base.field().same_grid(&fiber_potential)?;
        Ok(Self { base, fiber_potential })
    }

    pub fn tangent(&self) -> Result<TangentVector> {
        TangentVector::from_potential(self.base.clone(), self.fiber_potential.clone())
    }
}

/// Generating pair `(ψ, φ)` of the standard vector field `V_{ψ,φ}`: the base
/// moves along `exp(t∇ψ)_*μ` while the fiber potential grows by `tφ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardVectorFieldSpec {
    pub psi: RealField,
    pub phi: RealField,
}

/// Solves `-div(μ∇φ) = ψ` with `⟨φ, μ⟩ = 0`.
///
/// In one dimension the weighted Poisson equation integrates in closed form:
/// `μφ' = C - ∫_0^x ψ`, with `C` fixed by periodicity of `φ`.
pub fn solve_velocity_potential(mu: &DensityField, psi: &RealField) -> Result<TangentVector> {
    mu.field().same_grid(psi)?;
    let grid = mu.grid();
    let total = psi.integrate();
    let scale = 1.0 + psi.values().iter().map(|v| v.abs()).sum::<f64>() * grid.spacing();
    if total.abs() > 1e-10 * scale {
        return Err(Error::Compatibility(total));
    }
    let cumulative = grid.primitive(psi.values());
    let inv_mu: Vec<f64> = mu.values().iter().map(|m| 1.0 / m).collect();
    let c = grid.integral(
        &cumulative
            .iter()
            .zip(&inv_mu)
            .map(|(p, w)| p * w)
            .collect::<Vec<_>>(),
    ) / grid.integral(&inv_mu);
    let slope: Vec<f64> = cumulative
        .iter()
        .zip(&inv_mu)
        .map(|(p, w)| (c - p) * w)
        .collect();
    let phi = RealField::new(grid, grid.primitive(&slope))?;
    TangentVector::from_potential(mu.clone(), phi)
}

/// Metric `∫ ∇φ_a · ∇φ_b dμ`.
pub fn tangent_inner(a: &TangentVector, b: &TangentVector) -> Result<f64> {
    if !same_base(&a.base, &b.base) {
        return Err(Error::BaseMismatch);
    }
    Ok(weighted_inner(&a.base, &a.velocity(), &b.velocity()))
}

fn same_base(a: &DensityField, b: &DensityField) -> bool {
    if a.grid() != b.grid() {
        return false;
    }
    let scale = a.field().max_abs();
    a.values()
        .iter()
        .zip(b.values())
        .all(|(x, y)| (x - y).abs() <= 1e-13 * scale)
}

/// Push-forward of `μ` under `x ↦ x + t ψ'(x)`.
///
/// The map is inverted pointwise by Newton iteration on the trigonometric
/// interpolant of `ψ`, and the density follows from
/// `μ_t(x + tψ'(x)) (1 + tψ''(x)) = μ(x)`.
pub fn pushforward_density(mu: &DensityField, psi: &RealField, t: f64) -> Result<DensityField> {
    mu.field().same_grid(psi)?;
    if t == 0.0 {
        return Ok(mu.clone());
    }
    let grid = mu.grid();
    let d1 = grid.d1(psi.values());
    let d2 = grid.d2(psi.values());
    for (index, v) in d2.iter().enumerate() {
        let jac = 1.0 + t * v;
        if jac <= 0.0 {
            return Err(Error::Fold { index, value: jac });
        }
    }
    let psi_interp = psi.interpolant();
    let mu_interp = mu.field().interpolant();
    let tol = 1e-15 * grid.length();
    let mut out = Vec::with_capacity(grid.n());
    for (j, y) in grid.points().into_iter().enumerate() {
        let mut x = y - t * d1[j];
        let mut jac = 1.0 + t * d2[j];
        for _ in 0..60 {
            let (_, p1, p2) = psi_interp.eval_with_derivatives(x);
            jac = 1.0 + t * p2;
            if jac <= 0.0 {
                return Err(Error::Fold { index: j, value: jac });
            }
            let step = (x + t * p1 - y) / jac;
            x -= step;
            if step.abs() <= tol {
                let (_, _, p2) = psi_interp.eval_with_derivatives(x);
                jac = 1.0 + t * p2;
                break;
            }
        }
        out.push(mu_interp.eval(x) / jac);
    }
    DensityField::new(RealField::new(grid, out)?)
}

/// Functionals with a tabulated Wasserstein gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GradientKind {
    /// `⟨V, μ⟩`
    Potential,
    /// `∫ μ ln μ`
    Entropy,
    /// `∫ |∇ ln μ|² dμ`
    Fisher,
    /// `⟨V, μ⟩ + (ħ²/8) I(μ)`
    TotalF,
}

impl GradientKind {
    pub const ALL: [GradientKind; 4] = [
        GradientKind::Potential,
        GradientKind::Entropy,
        GradientKind::Fisher,
        GradientKind::TotalF,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GradientKind::Potential => "potential",
            GradientKind::Entropy => "entropy",
            GradientKind::Fisher => "fisher",
            GradientKind::TotalF => "total_F",
        }
    }

    /// Value of the functional at `μ`.
    pub fn value(self, mu: &DensityField, v: &PotentialField, c: &PhysicsConstants) -> Result<f64> {
        let f = functionals(mu, v, c)?;
        Ok(match self {
            GradientKind::Potential => f.potential_energy,
            GradientKind::Entropy => f.entropy,
            GradientKind::Fisher => f.fisher,
            GradientKind::TotalF => f.free_energy,
        })
    }
}

/// `|∇ ln μ|² - 2Δμ/μ`, the first variation of the Fisher information.
pub(crate) fn fisher_generator(mu: &DensityField) -> RealField {
    let grid = mu.grid();
    let dlog = grid.d1(mu.ln().values());
    let lap = grid.d2(mu.values());
    let raw: Vec<f64> = dlog
        .iter()
        .zip(&lap)
        .zip(mu.values())
        .map(|((d, l), m)| d * d - 2.0 * l / m)
        .collect();
    RealField::new(grid, grid.dealias(&raw)).expect("finite Fisher variation")
}

/// Wasserstein gradient `-div(μ ∇ DF)` of the chosen functional, returned
/// through its velocity potential `DF`.
pub fn wasserstein_gradient(
    kind: GradientKind,
    mu: &DensityField,
    v: &PotentialField,
    c: &PhysicsConstants,
) -> Result<TangentVector> {
    mu.field().same_grid(v.field())?;
    let generator = match kind {
        GradientKind::Potential => v.field().clone(),
        GradientKind::Entropy => mu.ln(),
        GradientKind::Fisher => fisher_generator(mu),
        GradientKind::TotalF => {
            let q = c.hbar() * c.hbar() / 8.0;
            v.field().zip_map(&fisher_generator(mu), |a, b| a + q * b)?
        }
    };
    TangentVector::from_potential(mu.clone(), generator)
}

/// `ω_W(V_a, V_b) = ⟨∇ψ_a, ∇φ_b⟩_μ - ⟨∇ψ_b, ∇φ_a⟩_μ`, independent of the fiber.
pub fn symplectic_form_w(
    base: &TangentBundlePoint,
    a: &StandardVectorFieldSpec,
    b: &StandardVectorFieldSpec,
) -> Result<f64> {
    let mu = &base.base;
    Ok(metric_pairing(mu, &a.psi, &b.phi)? - metric_pairing(mu, &b.psi, &a.phi)?)
}

/// `H_F = ½ ∫ |∇f|² dμ + F(μ)`.
pub fn hamiltonian_hf(p: &TangentBundlePoint, v: &PotentialField, c: &PhysicsConstants) -> Result<f64> {
    let kinetic = 0.5 * metric_pairing(&p.base, &p.fiber_potential, &p.fiber_potential)?;
    Ok(kinetic + functionals(&p.base, v, c)?.free_energy)
}

/// Hamiltonian vector field of `H_F`: `V_{f, -(½|∇f|² + V + Q₈(μ))}`.
pub fn hamiltonian_vector_field_xf(
    p: &TangentBundlePoint,
    v: &PotentialField,
    c: &PhysicsConstants,
) -> Result<StandardVectorFieldSpec> {
    let grid = p.base.grid();
    p.base.field().same_grid(v.field())?;
    let q = c.hbar() * c.hbar() / 8.0;
    let df = grid.d1(p.fiber_potential.values());
    let fisher = fisher_generator(&p.base);
    let phi: Vec<f64> = df
        .iter()
        .zip(v.field().values())
        .zip(fisher.values())
        .map(|((d, vv), fi)| -(0.5 * d * d + vv + q * fi))
        .collect();
    Ok(StandardVectorFieldSpec {
        psi: p.fiber_potential.clone(),
        phi: RealField::new(grid, phi)?,
    })
}

/// Covariant acceleration `∇_{μ̇} μ̇ = V_{∂_t φ + ½|∇φ|²}` from three samples
/// `(φ_{t-h}, φ_t, φ_{t+h})` of the velocity potential.
pub fn covariant_acceleration(
    phi_curve: [&RealField; 3],
    mu_t: &DensityField,
    h: f64,
) -> Result<TangentVector> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step h = {h} must be positive")));
    }
    let [before, now, after] = phi_curve;
    before.same_grid(now)?;
    after.same_grid(now)?;
    let grid = mu_t.grid();
    let grad = grid.d1(now.values());
    let generator: Vec<f64> = before
        .values()
        .iter()
        .zip(after.values())
        .zip(&grad)
        .map(|((b, a), g)| (a - b) / (2.0 * h) + 0.5 * g * g)
        .collect();
    TangentVector::from_potential(mu_t.clone(), RealField::new(grid, generator)?)
}
