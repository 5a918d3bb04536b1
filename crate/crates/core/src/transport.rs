//! Optimal transport on the line: quadratic Wasserstein distance through
//! quantile functions, the monotone Monge map, displacement interpolation and
//! the kinetic action of a sampled density path.
//!
//! The circle is cut open at the grid point where `μ + ν` is smallest.  Both
//! densities must carry at most [`CUT_MASS_LIMIT`] within [`CUT_WINDOW`]`·L`
//! of the cut; farther mass is transported as on an interval.

use crate::error::{Error, Result};
use crate::fields::DensityField;
use crate::grid::{Interpolant, RealField};
use crate::wgeom::solve_velocity_potential;

pub const CUT_MASS_LIMIT: f64 = 1e-8;

/// Half-width of the guarded neighbourhood of the cut, as a fraction of `L`.
pub const CUT_WINDOW: f64 = 1.0 / 32.0;

pub const DEFAULT_LADDER: usize = 4096;

/// Roundoff level of cumulative masses and positions.
const RESIDUAL: f64 = 1e-15;

/// Cumulative distribution of a grid density measured from a cut point,
/// evaluated through the trigonometric interpolant.
#[derive(Debug, Clone)]
struct Cumulative {
    density: Interpolant,
    cut: f64,
    offset: f64,
    length: f64,
    /// Cumulative mass at `cut + jh`, made non-decreasing.
    nodes: Vec<f64>,
    spacing: f64,
}

impl Cumulative {
    fn new(mu: &DensityField, cut_index: usize) -> Self {
        let grid = mu.grid();
        let density = mu.field().interpolant();
        let cut = grid.point(cut_index);
        let offset = density.eval_antiderivative(cut);
        let n = grid.n();
        let mut nodes = Vec::with_capacity(n + 1);
        let mut running: f64 = 0.0;
        for j in 0..=n {
            let x = cut + j as f64 * grid.spacing();
            running = running.max(density.eval_antiderivative(x) - offset);
            nodes.push(running);
        }
        Self {
            density,
            cut,
            offset,
            length: grid.length(),
            nodes,
            spacing: grid.spacing(),
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        self.density.eval_antiderivative(x) - self.offset
    }

    fn pdf(&self, x: f64) -> f64 {
        self.density.eval(x)
    }

    fn mass_between(&self, a: f64, b: f64) -> f64 {
        self.cdf(b) - self.cdf(a)
    }

    /// Position `x ∈ [cut, cut + L]` with `F(x) = p`.
    fn quantile(&self, p: f64) -> f64 {
        let total = *self.nodes.last().unwrap();
        let p = p.clamp(0.0, total);
        let cell = match self.nodes.partition_point(|&c| c <= p) {
            0 => 0,
            k if k >= self.nodes.len() => self.nodes.len() - 2,
            k => k - 1,
        };
        let mut lo = self.cut + cell as f64 * self.spacing;
        let mut hi = lo + self.spacing;
        let (f_lo, f_hi) = (self.nodes[cell], self.nodes[cell + 1]);
        let mut x = if f_hi > f_lo {
            lo + (hi - lo) * (p - f_lo) / (f_hi - f_lo)
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..100 {
            let r = self.cdf(x) - p;
            if r.abs() <= RESIDUAL {
                return x;
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = self.pdf(x);
            let newton = x - r / d;
            let next = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= 1e-15 * self.length || hi - lo <= 1e-15 * self.length {
                return next;
            }
            x = next;
        }
        x
    }
}

fn check_cut(mu: &Cumulative) -> Result<()> {
    let w = CUT_WINDOW * mu.length;
    let mass = mu.mass_between(mu.cut, mu.cut + w) + mu.mass_between(mu.cut + mu.length - w, mu.cut + mu.length);
    if mass > CUT_MASS_LIMIT {
        return Err(Error::Cut {
            mass,
            limit: CUT_MASS_LIMIT,
        });
    }
    Ok(())
}

fn cut_index(mu: &DensityField, nu: &DensityField) -> usize {
    mu.values()
        .iter()
        .zip(nu.values())
        .map(|(a, b)| a + b)
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(j, _)| j)
        .unwrap_or(0)
}

fn cut_pair(mu: &DensityField, nu: &DensityField) -> Result<(Cumulative, Cumulative)> {
    mu.field().same_grid(nu.field())?;
    let j = cut_index(mu, nu);
    let a = Cumulative::new(mu, j);
    let b = Cumulative::new(nu, j);
    check_cut(&a)?;
    check_cut(&b)?;
    Ok((a, b))
}

/// Quantile function sampled on the midpoint ladder `p_i = (i + ½)/m`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    probabilities: Vec<f64>,
    positions: Vec<f64>,
}

fn ladder(m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::InvalidArgument("quantile ladder needs at least one rung".into()));
    }
    Ok((0..m).map(|i| (i as f64 + 0.5) / m as f64).collect())
}

impl QuantileTable {
    fn from_cumulative(cdf: &Cumulative, m: usize) -> Result<Self> {
        let probabilities = ladder(m)?;
        let positions = probabilities.iter().map(|&p| cdf.quantile(p)).collect();
        Ok(Self {
            probabilities,
            positions,
        })
    }

    /// Quantiles of a discrete measure with atoms at `positions` (sorted
    /// internally) carrying `weights` that sum to one.
    pub fn from_atoms(positions: &[f64], weights: &[f64], m: usize) -> Result<Self> {
        if positions.len() != weights.len() || positions.is_empty() {
            return Err(Error::LengthMismatch {
                expected: positions.len(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidArgument("atom weights must be non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized {
                mass: total,
                tolerance: 1e-12,
            });
        }
        let mut atoms: Vec<(f64, f64)> = positions.iter().copied().zip(weights.iter().copied()).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let probabilities = ladder(m)?;
        let mut out = Vec::with_capacity(m);
        let mut k = 0;
        let mut acc = atoms[0].1;
        for &p in &probabilities {
            while p > acc && k + 1 < atoms.len() {
                k += 1;
                acc += atoms[k].1;
            }
            out.push(atoms[k].0);
        }
        Ok(Self {
            probabilities,
            positions: out,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// `(∫₀¹ |q_a(p) - q_b(p)|² dp)^{1/2}` by the midpoint rule.
    pub fn w2(&self, other: &QuantileTable) -> Result<f64> {
        if self.probabilities != other.probabilities {
            return Err(Error::LengthMismatch {
                expected: self.probabilities.len(),
                got: other.probabilities.len(),
            });
        }
        let m = self.positions.len() as f64;
        let sum: f64 = self
            .positions
            .iter()
            .zip(&other.positions)
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        Ok((sum / m).sqrt())
    }
}

/// Quantile tables of `μ` and `ν`, on a common cut.
pub fn quantile_tables(mu: &DensityField, nu: &DensityField, m: usize) -> Result<(QuantileTable, QuantileTable)> {
    let (a, b) = cut_pair(mu, nu)?;
    Ok((QuantileTable::from_cumulative(&a, m)?, QuantileTable::from_cumulative(&b, m)?))
}

pub fn w2_distance(mu: &DensityField, nu: &DensityField, m: usize) -> Result<f64> {
    let (a, b) = quantile_tables(mu, nu, m)?;
    a.w2(&b)
}

/// `μ_t = ((1 - t) id + tT)_* μ` with `T = q_ν ∘ F_μ` the monotone map.
///
/// Each grid point `y` is pulled back to the source point `x` solving
/// `(1 - t)x + tT(x) = y`; the density is `μ(x) / ((1 - t) + tT'(x))` with
/// `T'(x) = μ(x) / ν(T(x))`.
pub fn displacement_interpolation(mu: &DensityField, nu: &DensityField, t: f64) -> Result<DensityField> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("t = {t} outside [0, 1]")));
    }
    let (a, b) = cut_pair(mu, nu)?;
    let grid = mu.grid();
    let n = grid.n();
    let h = grid.spacing();
    let monge = |x: f64| b.quantile(a.cdf(x));
    let map = |x: f64| (1.0 - t) * x + t * monge(x);

    // images of the source nodes, kept monotone against roundoff in the tails
    let mut images = Vec::with_capacity(n + 1);
    let mut running = f64::NEG_INFINITY;
    for j in 0..=n {
        let x = a.cut + j as f64 * h;
        running = running.max(map(x));
        images.push(running);
    }
    images[0] = a.cut;
    images[n] = a.cut + grid.length();

    let mut values = vec![0.0; n];
    for k in 0..n {
        // target nodes in cut coordinates
        let y = a.cut + k as f64 * h;
        let cell = images.partition_point(|&v| v <= y).clamp(1, n) - 1;
        let (mut lo, mut hi) = (a.cut + cell as f64 * h, a.cut + (cell + 1) as f64 * h);
        let (f_lo, f_hi) = (images[cell], images[cell + 1]);
        let mut x = if f_hi > f_lo {
            lo + (hi - lo) * (y - f_lo) / (f_hi - f_lo)
        } else {
            0.5 * (lo + hi)
        };
        let mut density = 0.0;
        for _ in 0..100 {
            let image = monge(x);
            let source = a.pdf(x);
            let target = b.pdf(image);
            let slope = (1.0 - t) + t * source / target;
            density = source / slope;
            let r = (1.0 - t) * x + t * image - y;
            if r.abs() <= RESIDUAL * grid.length() {
                break;
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let newton = x - r / slope;
            let next = if slope > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= 1e-15 * grid.length() || hi - lo <= 1e-15 * grid.length() {
                break;
            }
            x = next;
        }
        let index = (cut_offset(grid.n(), grid.length(), a.cut) + k) % n;
        values[index] = density;
    }
    DensityField::new(RealField::new(grid, values)?)
}

fn cut_offset(n: usize, length: f64, cut: f64) -> usize {
    ((cut / length) * n as f64).round() as usize % n
}

/// `∫₀ᵀ ‖μ̇_s‖² ds` for a uniformly sampled path: central differences in
/// time (second-order one-sided at the ends), velocity potentials from the
/// weighted Poisson solve and the trapezoid rule.
pub fn path_action(path: &[DensityField], dt: f64) -> Result<f64> {
    if path.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "path needs at least 3 samples, got {}",
            path.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    let last = path.len() - 1;
    let mut energies = Vec::with_capacity(path.len());
    for k in 0..=last {
        let grid = path[k].grid();
        let rate: Vec<f64> = (0..grid.n())
            .map(|j| {
                let v = |i: usize| path[i].values()[j];
                match k {
                    0 => (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * dt),
                    k if k == last => (3.0 * v(last) - 4.0 * v(last - 1) + v(last - 2)) / (2.0 * dt),
                    k => (v(k + 1) - v(k - 1)) / (2.0 * dt),
                }
            })
            .collect();
        // sample mass drift is below the density tolerance, not transport
        let drift = rate.iter().sum::<f64>() / grid.n() as f64;
        let rate = rate.into_iter().map(|r| r - drift).collect();
        let tangent = solve_velocity_potential(&path[k], &RealField::new(grid, rate)?)?;
        energies.push(tangent.norm_squared());
    }
    let inner: f64 = energies[1..last].iter().sum();
    Ok(dt * (inner + 0.5 * (energies[0] + energies[last])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::normalize_density;
    use crate::grid::Grid;
    use crate::states;
    use std::f64::consts::PI;

    fn pair(a: f64, sigma: f64) -> (DensityField, DensityField) {
        let g = Grid::periodic(256).unwrap();
        (
            states::wrapped_gaussian_density(&g, PI - a / 2.0, sigma, 1e-12).unwrap(),
            states::wrapped_gaussian_density(&g, PI + a / 2.0, sigma, 1e-12).unwrap(),
        )
    }

    fn l1(a: &DensityField, b: &DensityField) -> f64 {
        a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).sum::<f64>() * a.grid().spacing()
    }

    #[test]
    fn identical_densities_are_at_zero_distance() {
        let (mu, _) = pair(0.5, 0.2);
        assert!(w2_distance(&mu, &mu, DEFAULT_LADDER).unwrap() < 1e-14);
    }

    #[test]
    fn translates_are_at_their_offset() {
        let (mu, nu) = pair(0.5, 0.1);
        let d = w2_distance(&mu, &nu, DEFAULT_LADDER).unwrap();
        assert!((d - 0.5).abs() < 1e-6, "{d}");
    }

    #[test]
    fn spread_mass_is_rejected_at_the_cut() {
        let g = Grid::periodic(64).unwrap();
        let flat = DensityField::uniform(&g).unwrap();
        assert!(matches!(w2_distance(&flat, &flat, 64), Err(Error::Cut { .. })));
    }

    /// All `k!` assignments between `k` equal-weight atoms.
    fn brute_force_w2(a: &[f64], b: &[f64]) -> f64 {
        fn permute(b: &mut Vec<f64>, start: usize, a: &[f64], best: &mut f64) {
            if start == b.len() {
                let cost: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y).powi(2)).sum();
                *best = best.min(cost / a.len() as f64);
                return;
            }
            for i in start..b.len() {
                b.swap(start, i);
                permute(b, start + 1, a, best);
                b.swap(start, i);
            }
        }
        let mut best = f64::INFINITY;
        permute(&mut b.to_vec(), 0, a, &mut best);
        best.sqrt()
    }

    #[test]
    fn histograms_match_brute_force_assignment() {
        use rand::Rng;
        let mut rng = states::rng(17);
        let bins: Vec<f64> = (0..16).map(|i| (i as f64 + 0.5) * 2.0 * PI / 16.0).collect();
        for _ in 0..5 {
            // 8 unit atoms dropped into 16 bins
            let mut counts_a = [0usize; 16];
            let mut counts_b = [0usize; 16];
            for _ in 0..8 {
                counts_a[rng.gen_range(0..16)] += 1;
                counts_b[rng.gen_range(0..16)] += 1;
            }
            let weights = |c: &[usize; 16]| c.iter().map(|&k| k as f64 / 8.0).collect::<Vec<_>>();
            let atoms = |c: &[usize; 16]| {
                c.iter()
                    .enumerate()
                    .flat_map(|(i, &k)| std::iter::repeat(bins[i]).take(k))
                    .collect::<Vec<_>>()
            };
            let qa = QuantileTable::from_atoms(&bins, &weights(&counts_a), DEFAULT_LADDER).unwrap();
            let qb = QuantileTable::from_atoms(&bins, &weights(&counts_b), DEFAULT_LADDER).unwrap();
            let oracle = brute_force_w2(&atoms(&counts_a), &atoms(&counts_b));
            assert!((qa.w2(&qb).unwrap() - oracle).abs() < 1e-6);
        }
    }

    #[test]
    fn interpolation_endpoints_and_mass() {
        let (mu, nu) = pair(0.5, 0.2);
        let start = displacement_interpolation(&mu, &nu, 0.0).unwrap();
        let end = displacement_interpolation(&mu, &nu, 1.0).unwrap();
        assert!(l1(&start, &mu) < 1e-6);
        assert!(l1(&end, &nu) < 1e-6, "{}", l1(&end, &nu));
        let mid = displacement_interpolation(&mu, &nu, 0.5).unwrap();
        assert!((mid.field().integrate() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn translates_interpolate_by_translation() {
        let (mu, nu) = pair(0.6, 0.2);
        let g = mu.grid().clone();
        for t in [0.25, 0.5, 0.8] {
            let mid = displacement_interpolation(&mu, &nu, t).unwrap();
            let center = PI - 0.3 + 0.6 * t;
            let exact = states::wrapped_gaussian_density(&g, center, 0.2, 1e-12).unwrap();
            assert!(l1(&mid, &exact) < 1e-6, "t = {t}: {}", l1(&mid, &exact));
        }
    }

    #[test]
    fn out_of_range_time_is_rejected() {
        let (mu, nu) = pair(0.5, 0.2);
        assert!(displacement_interpolation(&mu, &nu, 1.5).is_err());
    }

    #[test]
    fn constant_path_has_no_action() {
        let (mu, _) = pair(0.5, 0.2);
        let path = vec![mu; 5];
        assert!(path_action(&path, 0.1).unwrap() < 1e-15);
    }

    #[test]
    fn geodesic_action_equals_squared_distance() {
        let (mu, nu) = pair(0.5, 0.1);
        let samples = 64;
        let dt = 1.0 / (samples - 1) as f64;
        let path: Vec<DensityField> = (0..samples)
            .map(|k| displacement_interpolation(&mu, &nu, k as f64 * dt).unwrap())
            .collect();
        let action = path_action(&path, dt).unwrap();
        let w2 = w2_distance(&mu, &nu, DEFAULT_LADDER).unwrap();
        assert!((action / (w2 * w2) - 1.0).abs() < 1e-3, "{action} vs {}", w2 * w2);
    }

    #[test]
    fn perturbed_path_costs_more() {
        let (mu, nu) = pair(0.5, 0.2);
        let samples = 33;
        let dt = 1.0 / (samples - 1) as f64;
        let w2 = w2_distance(&mu, &nu, DEFAULT_LADDER).unwrap();
        let bump = RealField::from_fn(mu.grid(), |x| (2.0 * x).sin()).unwrap();
        let path: Vec<DensityField> = (0..samples)
            .map(|k| {
                let t = k as f64 * dt;
                let base = displacement_interpolation(&mu, &nu, t).unwrap();
                let w = 0.3 * (PI * t).sin();
                let raw = base.field().zip_map(&bump, |m, b| m * (1.0 + w * b)).unwrap();
                normalize_density(&raw).unwrap()
            })
            .collect();
        assert!(path_action(&path, dt).unwrap() > w2 * w2);
    }
}
