//! Standard states: wrapped Gaussians, plane waves and seeded random
//! smooth fields used by the scenarios and the test suites.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fields::{normalize_density, DensityField, PhaseField, PhysicsConstants, WaveField};
use crate::grid::{ComplexField, Grid, RealField};

pub type StateRng = ChaCha8Rng;

pub fn rng(seed: u64) -> StateRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Periodized Gaussian profile `Σ_m exp(-(x - c + mL)² / (2σ²))` summed over
/// enough images to converge.
fn wrapped_profile(grid: &Grid, center: f64, sigma: f64, x: f64, width_factor: f64) -> f64 {
    let l = grid.length();
    let images = ((8.0 * sigma) / l).ceil() as i64 + 1;
    (-images..=images)
        .map(|m| {
            let d = x - center + m as f64 * l;
            (-d * d / (width_factor * sigma * sigma)).exp()
        })
        .sum()
}

/// Normalized wrapped Gaussian with standard deviation `sigma`, plus an
/// absolute `pedestal` added before renormalizing (keeps far tails above
/// the density floor).
pub fn wrapped_gaussian_density(
    grid: &Grid,
    center: f64,
    sigma: f64,
    pedestal: f64,
) -> Result<DensityField> {
    let norm = 1.0 / (2.0 * PI * sigma * sigma).sqrt();
    let raw = RealField::from_fn(grid, |x| norm * wrapped_profile(grid, center, sigma, x, 2.0) + pedestal)?;
    normalize_density(&raw)
}

/// Wrapped Gaussian amplitude `Σ_m (2πσ²)^{-1/4} exp(-(x-c+mL)²/(4σ²))` times
/// `e^{iS/ħ}`; `|Ψ|²` has standard deviation `sigma`.
pub fn gaussian_wave(
    grid: &Grid,
    center: f64,
    sigma: f64,
    phase: &RealField,
    constants: &PhysicsConstants,
) -> Result<WaveField> {
    let hbar = constants.hbar();
    let amp = RealField::from_fn(grid, |x| wrapped_profile(grid, center, sigma, x, 4.0))?;
    WaveField::normalized(amp.zip_map(phase, |a, s| Complex64::from_polar(a, s / hbar))?)
}

/// `e^{i 2πk x / L} / √L`.
pub fn plane_wave(grid: &Grid, k: i64) -> Result<WaveField> {
    let w = 2.0 * PI * k as f64 / grid.length();
    let amp = 1.0 / grid.length().sqrt();
    WaveField::normalized(ComplexField::from_fn(grid, |x| Complex64::from_polar(amp, w * x))?)
}

/// `√μ e^{iS/ħ}`, normalized.
pub fn polar_wave(density: &DensityField, phase: &RealField, constants: &PhysicsConstants) -> Result<WaveField> {
    let hbar = constants.hbar();
    WaveField::normalized(
        density
            .field()
            .zip_map(phase, |m, s| Complex64::from_polar(m.sqrt(), s / hbar))?,
    )
}

/// Random trigonometric polynomial with modes `1..=modes` and coefficients
/// uniform in `[-amplitude, amplitude] / k`.
pub fn random_trig_field(grid: &Grid, rng: &mut StateRng, modes: usize, amplitude: f64) -> Result<RealField> {
    let coeffs: Vec<(f64, f64)> = (1..=modes)
        .map(|k| {
            let s = amplitude / k as f64;
            (rng.gen_range(-s..=s), rng.gen_range(-s..=s))
        })
        .collect();
    let base = 2.0 * PI / grid.length();
    RealField::from_fn(grid, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let kx = base * (i + 1) as f64 * x;
                a * kx.cos() + b * kx.sin()
            })
            .sum()
    })
}

/// `μ ∝ exp(random trigonometric polynomial)`; smooth with a band-limited logarithm.
pub fn random_density(grid: &Grid, rng: &mut StateRng, modes: usize, amplitude: f64) -> Result<DensityField> {
    let log = random_trig_field(grid, rng, modes, amplitude)?;
    normalize_density(&log.map(f64::exp)?)
}

/// Random mean-zero phase paired with `density`.
pub fn random_phase(
    density: &DensityField,
    rng: &mut StateRng,
    modes: usize,
    amplitude: f64,
) -> Result<PhaseField> {
    let s = random_trig_field(density.grid(), rng, modes, amplitude)?;
    PhaseField::mean_zero(s, density)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_density_has_expected_width() {
        let grid = Grid::periodic(256).unwrap();
        let (sigma, pedestal) = (0.3, 1e-9);
        let mu = wrapped_gaussian_density(&grid, PI, sigma, pedestal).unwrap();
        let var: f64 = mu
            .values()
            .iter()
            .zip(grid.points())
            .map(|(m, x)| m * (x - PI).powi(2))
            .sum::<f64>()
            * grid.spacing();
        let flat = 2.0 * PI.powi(3) / 3.0;
        let expected = (sigma * sigma + pedestal * flat) / (1.0 + pedestal * 2.0 * PI);
        assert!((var - expected).abs() < 1e-12);
    }

    #[test]
    fn gaussian_wave_modulus_matches_density() {
        let grid = Grid::periodic(128).unwrap();
        let c = PhysicsConstants::default();
        let zero = RealField::constant(&grid, 0.0).unwrap();
        let psi = gaussian_wave(&grid, 2.0, 0.5, &zero, &c).unwrap();
        let mu = wrapped_gaussian_density(&grid, 2.0, 0.5, 0.0).unwrap();
        for (z, m) in psi.values().iter().zip(mu.values()) {
            assert!((z.norm_sqr() - m).abs() < 1e-8);
        }
    }

    #[test]
    fn seeded_rngs_are_reproducible() {
        let grid = Grid::periodic(32).unwrap();
        let a = random_density(&grid, &mut rng(7), 3, 1.0).unwrap();
        let b = random_density(&grid, &mut rng(7), 3, 1.0).unwrap();
        assert_eq!(a, b);
    }
}
