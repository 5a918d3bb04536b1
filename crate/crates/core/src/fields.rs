//! Densities, wave functions, phases and the scalar functionals built on them.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid, RealField};
use crate::wgeom::TangentVector;

/// Density floor relative to the uniform level `1/L`.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// Tolerance on `∫ μ = 1` accepted by [`DensityField::new`].
pub const MASS_TOLERANCE: f64 = 1e-8;

/// Tolerance on `∫ |Ψ|² = 1` accepted by [`WaveField::new`].
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Tolerance on gauge conditions.
pub const GAUGE_TOLERANCE: f64 = 1e-10;

/// Absolute floor `ε_μ` on a grid.
pub fn density_floor(grid: &Grid) -> f64 {
    DENSITY_FLOOR / grid.length()
}

/// Strictly positive probability density on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    field: RealField,
}

impl DensityField {
    /// Wraps an already normalized field, checking the floor and the mass.
    pub fn new(field: RealField) -> Result<Self> {
        check_floor(&field)?;
        let mass = field.integrate();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::NotNormalized {
                mass,
                tolerance: MASS_TOLERANCE,
            });
        }
        Ok(Self { field })
    }

    pub fn uniform(grid: &Grid) -> Result<Self> {
        Self::new(RealField::constant(grid, 1.0 / grid.length())?)
    }

    pub fn field(&self) -> &RealField {
        &self.field
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    pub fn into_field(self) -> RealField {
        self.field
    }

    /// `∫ f dμ`.
    pub fn expectation(&self, f: &RealField) -> Result<f64> {
        self.field.inner(f)
    }

    pub fn ln(&self) -> RealField {
        self.field.map(f64::ln).expect("positive density has a finite logarithm")
    }

    pub fn sqrt(&self) -> RealField {
        self.field.map(f64::sqrt).expect("positive density has a finite root")
    }
}

fn check_floor(field: &RealField) -> Result<()> {
    let floor = density_floor(field.grid());
    for (index, &value) in field.values().iter().enumerate() {
        if value <= floor {
            return Err(Error::Node { index, value, floor });
        }
    }
    Ok(())
}

/// Scales a positive field to unit mass.
pub fn normalize_density(raw: &RealField) -> Result<DensityField> {
    let mass = raw.integrate();
    if !(mass > 0.0) {
        check_floor(raw)?;
    }
    let scaled = raw.map(|v| v / mass)?;
    check_floor(&scaled)?;
    DensityField::new(scaled)
}

/// Unit-norm complex field.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    field: ComplexField,
}

impl WaveField {
    pub fn new(field: ComplexField) -> Result<Self> {
        let norm2 = field.l2_norm().powi(2);
        if (norm2 - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized {
                mass: norm2,
                tolerance: NORM_TOLERANCE,
            });
        }
        Ok(Self { field })
    }

    /// Rescales to unit norm.
    pub fn normalized(field: ComplexField) -> Result<Self> {
        let norm = field.l2_norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidArgument("cannot normalize the zero field".into()));
        }
        Self::new(field.map(|z| z / norm)?)
    }

    pub fn field(&self) -> &ComplexField {
        &self.field
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn values(&self) -> &[Complex64] {
        self.field.values()
    }

    pub fn into_field(self) -> ComplexField {
        self.field
    }

    /// `|Ψ|²` as a raw field (no admissibility check).
    pub fn modulus_squared(&self) -> RealField {
        self.field.map(|z| z.norm_sqr()).expect("finite wave field")
    }

    /// Multiplies by a global phase `e^{iκ}`.
    pub fn with_global_phase(&self, kappa: f64) -> Self {
        let rot = Complex64::from_polar(1.0, kappa);
        Self {
            field: self.field.map(|z| z * rot).expect("finite wave field"),
        }
    }

    /// Fails with [`Error::Node`] unless `min |Ψ| > √ε_μ`.
    pub fn ensure_nodeless(&self) -> Result<()> {
        let floor = density_floor(self.grid());
        for (index, z) in self.values().iter().enumerate() {
            let value = z.norm_sqr();
            if value <= floor {
                return Err(Error::Node { index, value, floor });
            }
        }
        Ok(())
    }

    pub fn is_nodeless(&self) -> bool {
        self.ensure_nodeless().is_ok()
    }

    /// `⟨Ψ, Φ⟩ = ∫ Ψ conj(Φ) dx`.
    pub fn inner(&self, other: &WaveField) -> Result<Complex64> {
        self.field.same_grid(&other.field)?;
        Ok(self
            .values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            * self.grid().spacing())
    }
}

/// Additive normalization of a phase field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gauge {
    /// `⟨S, μ⟩ = 0` for the density the phase is paired with.
    MeanZero,
    /// `S(0) = r`.
    Pinned(f64),
}

/// Phase `S` in units of action.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    field: RealField,
    gauge: Gauge,
}

impl PhaseField {
    /// Shifts `field` so that `⟨S, μ⟩ = 0`.
    pub fn mean_zero(field: RealField, density: &DensityField) -> Result<Self> {
        let shift = density.expectation(&field)?;
        Ok(Self {
            field: field.map(|v| v - shift)?,
            gauge: Gauge::MeanZero,
        })
    }

    /// Shifts `field` so that `S(0) = r`.
    pub fn pinned(field: RealField, r: f64) -> Result<Self> {
        let shift = field.values()[0] - r;
        Ok(Self {
            field: field.map(|v| v - shift)?,
            gauge: Gauge::Pinned(r),
        })
    }

    pub fn field(&self) -> &RealField {
        &self.field
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    pub fn into_field(self) -> RealField {
        self.field
    }

    pub fn to_mean_zero(&self, density: &DensityField) -> Result<Self> {
        Self::mean_zero(self.field.clone(), density)
    }

    pub fn to_pinned(&self, r: f64) -> Result<Self> {
        Self::pinned(self.field.clone(), r)
    }

    /// Verifies the gauge condition; `density` is needed for [`Gauge::MeanZero`].
    pub fn check_gauge(&self, density: &DensityField) -> Result<()> {
        match self.gauge {
            Gauge::MeanZero => {
                let mean = density.expectation(&self.field)?;
                let scale = 1.0 + self.field.max_abs();
                if mean.abs() > GAUGE_TOLERANCE * scale {
                    return Err(Error::Gauge(format!("<S, mu> = {mean:e}")));
                }
            }
            Gauge::Pinned(r) => {
                let s0 = self.field.values()[0];
                if (s0 - r).abs() > GAUGE_TOLERANCE * (1.0 + r.abs()) {
                    return Err(Error::Gauge(format!("S(0) = {s0}, expected {r}")));
                }
            }
        }
        Ok(())
    }
}

/// Real potential `V` in energy units.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    field: RealField,
}

impl PotentialField {
    pub fn new(field: RealField) -> Self {
        Self { field }
    }

    pub fn zero(grid: &Grid) -> Self {
        Self::new(RealField::constant(grid, 0.0).expect("finite"))
    }

    pub fn field(&self) -> &RealField {
        &self.field
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsConstants {
    hbar: f64,
}

impl PhysicsConstants {
    pub fn new(hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidArgument(format!("hbar = {hbar} must be positive")));
        }
        Ok(Self { hbar })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }
}

impl Default for PhysicsConstants {
    fn default() -> Self {
        Self { hbar: 1.0 }
    }
}

/// Scalar functionals of a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Functionals {
    /// `∫ μ ln μ dx`
    pub entropy: f64,
    /// `∫ |∇ ln μ|² dμ`
    pub fisher: f64,
    /// `∫ V dμ`
    pub potential_energy: f64,
    /// `∫ V dμ + (ħ²/8) fisher`
    pub free_energy: f64,
}

pub fn entropy(density: &DensityField) -> f64 {
    density
        .values()
        .iter()
        .map(|&m| m * m.ln())
        .sum::<f64>()
        * density.grid().spacing()
}

/// Fisher information from the spectral derivative of `ln μ`.
pub fn fisher_information(density: &DensityField) -> f64 {
    let grid = density.grid();
    let dlog = grid.d1(density.ln().values());
    dlog.iter()
        .zip(density.values())
        .map(|(d, m)| d * d * m)
        .sum::<f64>()
        * grid.spacing()
}

pub fn functionals(
    density: &DensityField,
    potential: &PotentialField,
    constants: &PhysicsConstants,
) -> Result<Functionals> {
    let potential_energy = density.expectation(potential.field())?;
    let fisher = fisher_information(density);
    let hbar = constants.hbar();
    Ok(Functionals {
        entropy: entropy(density),
        fisher,
        potential_energy,
        free_energy: potential_energy + hbar * hbar / 8.0 * fisher,
    })
}

/// `L_F(ψ) = ½ ‖ψ‖² − F(μ)` at the base of the tangent vector.
pub fn lagrangian_lf(
    tangent: &TangentVector,
    potential: &PotentialField,
    constants: &PhysicsConstants,
) -> Result<f64> {
    let f = functionals(tangent.base(), potential, constants)?;
    Ok(0.5 * tangent.norm_squared() - f.free_energy)
}

fn principal(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Principal-value phase increments between neighbours, the last one
/// closing the loop from the final point back to `x = 0`.
fn phase_increments(psi: &WaveField) -> Result<Vec<f64>> {
    psi.ensure_nodeless()?;
    let values = psi.values();
    let n = values.len();
    let mut jumps = Vec::with_capacity(n);
    for j in 0..n {
        let next = values[(j + 1) % n];
        let jump = principal(next.arg() - values[j].arg());
        if jump.abs() >= PI / 2.0 {
            return Err(Error::Alias { index: j, jump });
        }
        jumps.push(jump);
    }
    Ok(jumps)
}

/// Number of times `arg Ψ` winds around the circle.
pub fn winding_number(psi: &WaveField) -> Result<i64> {
    let total: f64 = phase_increments(psi)?.iter().sum();
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Continuous argument of `Ψ`, starting from the principal value at `x = 0`
/// reduced to `[0, 2π)`.
pub fn unwrapped_argument(psi: &WaveField) -> Result<RealField> {
    let jumps = phase_increments(psi)?;
    let total: f64 = jumps.iter().sum();
    let winding = (total / (2.0 * PI)).round() as i64;
    if winding != 0 {
        return Err(Error::Winding(winding));
    }
    let mut start = psi.values()[0].arg();
    if start < 0.0 {
        start += 2.0 * PI;
    }
    let mut out = Vec::with_capacity(jumps.len());
    let mut acc = start;
    for jump in &jumps[..jumps.len() - 1] {
        out.push(acc);
        acc += jump;
    }
    out.push(acc);
    RealField::new(psi.grid(), out)
}
