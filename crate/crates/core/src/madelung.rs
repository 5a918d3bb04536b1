//! The complex side: wave functions with the symplectic form `ω_C` and the
//! Schrödinger Hamiltonian `H_S`, the Madelung transform
//! `σ(Ψ) = -div(|Ψ|²∇S)` onto the tangent bundle, its section `τ` pinning the
//! phase at `x = 0`, the quantum potential and the phase-correction integral
//! that turns mean-zero velocity potentials into Madelung phases.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{
    lagrangian_lf, normalize_density, unwrapped_argument, DensityField, Gauge, PhaseField,
    PhysicsConstants, PotentialField, WaveField,
};
use crate::grid::{ComplexField, RealField};
use crate::wgeom::{pushforward_density, StandardVectorFieldSpec, TangentBundlePoint, TangentVector};

/// `Ψ = √μ e^{iS/ħ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarDecomposition {
    pub density: DensityField,
    pub phase: PhaseField,
    pub hbar: f64,
}

impl PolarDecomposition {
    pub fn reconstruct(&self) -> Result<WaveField> {
        let hbar = self.hbar;
        WaveField::normalized(
            self.density
                .field()
                .zip_map(self.phase.field(), |m, s| Complex64::from_polar(m.sqrt(), s / hbar))?,
        )
    }
}

/// Madelung transform of a nodeless, winding-free wave function.
///
/// The phase comes back pinned at `S(0) = ħ arg Ψ(0) ∈ [0, 2πħ)`, so that
/// [`tau_section`] with that `r` reproduces `Ψ` exactly.
pub fn madelung_transform(
    psi: &WaveField,
    c: &PhysicsConstants,
) -> Result<(PolarDecomposition, TangentVector)> {
    let arg = unwrapped_argument(psi)?;
    let hbar = c.hbar();
    let s = arg.map(|a| hbar * a)?;
    let r = s.values()[0];
    let density = normalize_density(&psi.modulus_squared())?;
    let tangent = TangentVector::from_potential(density.clone(), s.clone())?;
    let polar = PolarDecomposition {
        density,
        phase: PhaseField::pinned(s, r)?,
        hbar,
    };
    Ok((polar, tangent))
}

/// Section `τ^{(r)}: -div(μ∇S) ↦ √μ e^{(i/ħ)(S - (S(0) - r))}`.
pub fn tau_section(
    mu: &DensityField,
    s: &PhaseField,
    r: f64,
    c: &PhysicsConstants,
) -> Result<WaveField> {
    let hbar = c.hbar();
    if !(0.0..2.0 * PI * hbar).contains(&r) {
        return Err(Error::InvalidArgument(format!(
            "pin value r = {r} outside [0, 2πħ)"
        )));
    }
    let shift = s.values()[0] - r;
    WaveField::normalized(
        mu.field()
            .zip_map(s.field(), |m, sv| Complex64::from_polar(m.sqrt(), (sv - shift) / hbar))?,
    )
}

/// `Q₈(μ) = (ħ²/8)(|∇ln μ|² - 2Δμ/μ)`.
pub fn quantum_potential(mu: &DensityField, c: &PhysicsConstants) -> RealField {
    let grid = mu.grid();
    let q = c.hbar() * c.hbar() / 8.0;
    let dlog = grid.d1(mu.ln().values());
    let lap = grid.d2(mu.values());
    let values = dlog
        .iter()
        .zip(&lap)
        .zip(mu.values())
        .map(|((d, l), m)| q * (d * d - 2.0 * l / m))
        .collect();
    RealField::new(grid, values).expect("finite quantum potential")
}

/// `ω_C(F, G) = -2 ∫ Im(F Ḡ) dx`.
pub fn symplectic_form_c(f: &ComplexField, g: &ComplexField) -> Result<f64> {
    f.same_grid(g)?;
    let im: f64 = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| (a * b.conj()).im)
        .sum();
    Ok(-2.0 * im * f.grid().spacing())
}

/// `H_S(Ψ) = (ħ²/2) ∫ |∇Ψ|² dx + ∫ |Ψ|² V dx`.
pub fn hamiltonian_hs(psi: &WaveField, v: &PotentialField, c: &PhysicsConstants) -> Result<f64> {
    psi.field().same_grid(v.field())?;
    let grid = psi.grid();
    let dpsi = grid.d1(psi.values());
    let kinetic: f64 = dpsi.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.spacing();
    let potential: f64 = psi
        .values()
        .iter()
        .zip(v.field().values())
        .map(|(z, vv)| z.norm_sqr() * vv)
        .sum::<f64>()
        * grid.spacing();
    let hbar = c.hbar();
    Ok(0.5 * hbar * hbar * kinetic + potential)
}

/// `S̄_t = S_t + ∫_0^t L_F(S_σ, μ_σ) dσ` by the cumulative trapezoid rule on a
/// uniformly sampled trajectory of mean-zero phases.
pub fn phase_correction(
    phases: &[PhaseField],
    densities: &[DensityField],
    v: &PotentialField,
    c: &PhysicsConstants,
    timestep: f64,
) -> Result<Vec<PhaseField>> {
    if phases.len() != densities.len() {
        return Err(Error::InvalidArgument(format!(
            "{} phases for {} densities",
            phases.len(),
            densities.len()
        )));
    }
    let mut lagrangians = Vec::with_capacity(phases.len());
    for (s, mu) in phases.iter().zip(densities) {
        if s.gauge() != Gauge::MeanZero {
            return Err(Error::Gauge(format!("expected a mean-zero phase, got {:?}", s.gauge())));
        }
        s.check_gauge(mu)?;
        let tangent = TangentVector::from_potential(mu.clone(), s.field().clone())?;
        lagrangians.push(lagrangian_lf(&tangent, v, c)?);
    }
    let mut out = Vec::with_capacity(phases.len());
    let mut acc = 0.0;
    for (k, s) in phases.iter().enumerate() {
        if k > 0 {
            acc += 0.5 * timestep * (lagrangians[k - 1] + lagrangians[k]);
        }
        let shifted = s.field().map(|x| x + acc)?;
        let pin = shifted.values()[0];
        out.push(PhaseField::pinned(shifted, pin)?);
    }
    Ok(out)
}

/// `min_κ ‖Ψ - e^{iκ}Φ‖`, attained at `κ = arg⟨Ψ, Φ⟩`.
pub fn distance_modulo_phase(psi: &WaveField, phi: &WaveField) -> Result<f64> {
    let overlap = psi.inner(phi)?;
    let rot = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
    Ok(psi.field().zip_map(phi.field(), |a, b| a - rot * b)?.l2_norm())
}

fn curve_point(
    base: &TangentBundlePoint,
    spec: &StandardVectorFieldSpec,
    r: f64,
    c: &PhysicsConstants,
    t: f64,
) -> Result<WaveField> {
    let mu_t = pushforward_density(&base.base, &spec.psi, t)?;
    let s_t = base.fiber_potential.zip_map(&spec.phi, |f, p| f + t * p)?;
    let pin = s_t.values()[0];
    tau_section(&mu_t, &PhaseField::pinned(s_t, pin)?, r, c)
}

/// `τ_* V_{ψ,φ}` by central differences of `τ` along the curve
/// `t ↦ -div(μ_t ∇(f + tφ))`, `μ_t = exp(t∇ψ)_*μ`.
pub fn tau_pushforward(
    base: &TangentBundlePoint,
    spec: &StandardVectorFieldSpec,
    r: f64,
    c: &PhysicsConstants,
    h: f64,
) -> Result<ComplexField> {
    let plus = curve_point(base, spec, r, c, h)?;
    let minus = curve_point(base, spec, r, c, -h)?;
    plus.field()
        .zip_map(minus.field(), |a, b| (a - b) / (2.0 * h))
}

/// Closed form of [`tau_pushforward`]:
/// `e^{(i/ħ)(f - f(0) + r)} (μ̇ / (2√μ) + i√μ (φ - φ(0)) / ħ)` with `μ̇ = -div(μ∇ψ)`.
pub fn tau_pushforward_exact(
    base: &TangentBundlePoint,
    spec: &StandardVectorFieldSpec,
    r: f64,
    c: &PhysicsConstants,
) -> Result<ComplexField> {
    let hbar = c.hbar();
    let mu = &base.base;
    let grid = mu.grid();
    let flux: Vec<f64> = grid
        .d1(spec.psi.values())
        .iter()
        .zip(mu.values())
        .map(|(d, m)| d * m)
        .collect();
    let mu_dot: Vec<f64> = grid.d1(&flux).into_iter().map(|v| -v).collect();
    let f = base.fiber_potential.values();
    let phi = spec.phi.values();
    let values = (0..grid.n())
        .map(|j| {
            let root = mu.values()[j].sqrt();
            let rot = Complex64::from_polar(1.0, (f[j] - f[0] + r) / hbar);
            rot * Complex64::new(mu_dot[j] / (2.0 * root), root * (phi[j] - phi[0]) / hbar)
        })
        .collect();
    ComplexField::new(grid, values)
}
