//! Uniform periodic grid and Fourier-pseudospectral calculus.
//!
//! Every other module differentiates, integrates and filters through a
//! [`Grid`]. Fields are plain sample vectors tagged with the grid they live
//! on; spectral operators go through the FFT plans the grid owns.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Cutoff used for every dealiased nonlinear product.
pub const DEALIAS_CUTOFF: f64 = 2.0 / 3.0;

/// Uniform sampling of the circle `[0, L)` with `n` points.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

impl Grid {
    /// `n` must be a power of two no smaller than 8.
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two >= 8"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length = {length} must be positive")));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            length,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    /// The circle of length `2π`.
    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        j as f64 * self.length / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Signed integer mode number of FFT slot `j`; the Nyquist slot reports `n/2`.
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.n / 2
    }

    /// Angular wavenumber `2πk/L` of FFT slot `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI * self.mode(j) as f64 / self.length
    }

    /// Normalized forward transform: `c_k = (1/n) Σ f_j e^{-i κ_k x_j}`.
    pub fn forward(&self, data: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(data.len(), self.n);
        let mut buf = data.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Inverse of [`Grid::forward`].
    pub fn inverse(&self, mut coeffs: Vec<Complex64>) -> Vec<Complex64> {
        debug_assert_eq!(coeffs.len(), self.n);
        self.inverse.process(&mut coeffs);
        coeffs
    }

    fn apply_symbol<T: Sample>(&self, values: &[T], symbol: impl Fn(usize) -> Complex64) -> Vec<T> {
        let data: Vec<Complex64> = values.iter().map(|v| v.to_complex()).collect();
        let mut coeffs = self.forward(&data);
        for (j, c) in coeffs.iter_mut().enumerate() {
            *c *= symbol(j);
        }
        self.inverse(coeffs).into_iter().map(T::from_complex).collect()
    }

    fn derivative_symbol(&self, j: usize) -> Complex64 {
        if self.is_nyquist(j) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, self.wavenumber(j))
        }
    }

    fn laplacian_symbol(&self, j: usize) -> Complex64 {
        let k = self.wavenumber(j);
        Complex64::new(-k * k, 0.0)
    }

    fn filter_symbol(&self, j: usize, cutoff_fraction: f64) -> Complex64 {
        let limit = cutoff_fraction * (self.n / 2) as f64;
        if (self.mode(j).abs() as f64) > limit {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        }
    }

    /// Raw spectral first derivative (Nyquist mode zeroed).
    pub fn d1<T: Sample>(&self, values: &[T]) -> Vec<T> {
        self.apply_symbol(values, |j| self.derivative_symbol(j))
    }

    /// Raw spectral second derivative.
    pub fn d2<T: Sample>(&self, values: &[T]) -> Vec<T> {
        self.apply_symbol(values, |j| self.laplacian_symbol(j))
    }

    /// Raw low-pass filter; keeps modes with `|k| <= cutoff_fraction * n/2`.
    pub fn filter<T: Sample>(&self, values: &[T], cutoff_fraction: f64) -> Vec<T> {
        self.apply_symbol(values, |j| self.filter_symbol(j, cutoff_fraction))
    }

    /// Dealiasing filter at [`DEALIAS_CUTOFF`].
    pub fn dealias<T: Sample>(&self, values: &[T]) -> Vec<T> {
        self.filter(values, DEALIAS_CUTOFF)
    }

    /// Zero-mean periodic primitive of `values - mean(values)`.
    pub fn primitive(&self, values: &[f64]) -> Vec<f64> {
        self.apply_symbol(values, |j| {
            if j == 0 || self.is_nyquist(j) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0 / self.wavenumber(j))
            }
        })
    }

    /// Rectangle rule, which coincides with the trapezoid rule on a periodic grid.
    pub fn integral(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.spacing()
    }

    pub fn integral_complex(&self, values: &[Complex64]) -> Complex64 {
        values.iter().sum::<Complex64>() * self.spacing()
    }
}

/// Sample type of a grid field.
pub trait Sample: Copy + Send + Sync + fmt::Debug + 'static {
    fn to_complex(self) -> Complex64;
    fn from_complex(z: Complex64) -> Self;
    /// First non-finite component, if any.
    fn non_finite(self) -> Option<f64>;
}

impl Sample for f64 {
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_complex(z: Complex64) -> Self {
        z.re
    }
    fn non_finite(self) -> Option<f64> {
        (!self.is_finite()).then_some(self)
    }
}

impl Sample for Complex64 {
    fn to_complex(self) -> Complex64 {
        self
    }
    fn from_complex(z: Complex64) -> Self {
        z
    }
    fn non_finite(self) -> Option<f64> {
        if !self.re.is_finite() {
            Some(self.re)
        } else if !self.im.is_finite() {
            Some(self.im)
        } else {
            None
        }
    }
}

/// One finite sample per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T: Sample> {
    grid: Grid,
    values: Vec<T>,
}

pub type RealField = Field<f64>;
pub type ComplexField = Field<Complex64>;

fn check_values<T: Sample>(values: &[T]) -> Result<()> {
    for (index, v) in values.iter().enumerate() {
        if let Some(value) = v.non_finite() {
            return Err(Error::NonFinite { index, value });
        }
    }
    Ok(())
}

impl<T: Sample> Field<T> {
    pub fn new(grid: &Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        check_values(&values)?;
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> T) -> Result<Self> {
        Self::new(grid, grid.points().into_iter().map(f).collect())
    }

    pub fn constant(grid: &Grid, value: T) -> Result<Self> {
        Self::new(grid, vec![value; grid.n()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Fails if the receiver contains a non-finite sample. Fields built
    /// through [`Field::new`] never do, but pointwise maps can produce them.
    pub fn ensure_finite(&self) -> Result<()> {
        check_values(&self.values)
    }

    pub fn same_grid<U: Sample>(&self, other: &Field<U>) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map<U: Sample>(&self, f: impl Fn(T) -> U) -> Result<Field<U>> {
        Field::new(&self.grid, self.values.iter().copied().map(f).collect())
    }

    pub fn zip_map<U: Sample, V: Sample>(
        &self,
        other: &Field<U>,
        f: impl Fn(T, U) -> V,
    ) -> Result<Field<V>> {
        self.same_grid(other)?;
        Field::new(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Spectral first derivative; the Nyquist mode's derivative is zero.
    pub fn derivative(&self) -> Result<Self> {
        self.ensure_finite()?;
        Self::new(&self.grid, self.grid.d1(&self.values))
    }

    /// Spectral Laplacian with symbol `-(2πk/L)²`.
    pub fn laplacian(&self) -> Result<Self> {
        self.ensure_finite()?;
        Self::new(&self.grid, self.grid.d2(&self.values))
    }

    /// Zeroes every Fourier mode above `cutoff_fraction · n/2`.
    pub fn low_pass_filter(&self, cutoff_fraction: f64) -> Result<Self> {
        if !(cutoff_fraction > 0.0 && cutoff_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cutoff fraction {cutoff_fraction} outside (0, 1]"
            )));
        }
        self.ensure_finite()?;
        Self::new(&self.grid, self.grid.filter(&self.values, cutoff_fraction))
    }

    /// Normalized Fourier coefficients in FFT order.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let data: Vec<Complex64> = self.values.iter().map(|v| v.to_complex()).collect();
        self.grid.forward(&data)
    }
}

impl RealField {
    pub fn integrate(&self) -> f64 {
        self.grid.integral(&self.values)
    }

    /// `∫ f g dx`.
    pub fn inner(&self, other: &RealField) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.spacing())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `(∫ f² dx)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.spacing()).sqrt()
    }

    pub fn interpolant(&self) -> Interpolant {
        Interpolant::new(self)
    }
}

impl ComplexField {
    pub fn integrate(&self) -> Complex64 {
        self.grid.integral_complex(&self.values)
    }

    /// `(∫ |f|² dx)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()).sqrt()
    }
}

/// Trigonometric interpolant of a real field, evaluable off the grid.
#[derive(Debug, Clone)]
pub struct Interpolant {
    mean: f64,
    // slots 1..n/2, the Nyquist slot last
    coeffs: Vec<Complex64>,
    base: f64,
    nyquist: f64,
}

impl Interpolant {
    pub fn new(field: &RealField) -> Self {
        let grid = field.grid();
        let spectrum = field.spectrum();
        let half = grid.n() / 2;
        Self {
            mean: spectrum[0].re,
            coeffs: spectrum[1..=half].to_vec(),
            base: 2.0 * PI / grid.length(),
            nyquist: spectrum[half].re,
        }
    }

    fn half(&self) -> usize {
        self.coeffs.len()
    }

    /// Value, first and second derivative at `x`.
    pub fn eval_with_derivatives(&self, x: f64) -> (f64, f64, f64) {
        let step = Complex64::from_polar(1.0, self.base * x);
        let mut phase = step;
        let (mut v, mut d1, mut d2) = (self.mean, 0.0, 0.0);
        for k in 1..self.half() {
            let kappa = self.base * k as f64;
            let term = self.coeffs[k - 1] * phase;
            v += 2.0 * term.re;
            d1 -= 2.0 * kappa * term.im;
            d2 -= 2.0 * kappa * kappa * term.re;
            phase *= step;
        }
        let kn = self.base * self.half() as f64;
        let (s, c) = (kn * x).sin_cos();
        v += self.nyquist * c;
        d1 -= self.nyquist * kn * s;
        d2 -= self.nyquist * kn * kn * c;
        (v, d1, d2)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_derivatives(x).0
    }

    /// `∫_0^x f(s) ds`.
    pub fn eval_antiderivative(&self, x: f64) -> f64 {
        let step = Complex64::from_polar(1.0, self.base * x);
        let mut phase = step;
        let mut acc = self.mean * x;
        for k in 1..self.half() {
            let kappa = self.base * k as f64;
            // 2 Re(c (e^{iκx} - 1) / (iκ))
            let term = self.coeffs[k - 1] * (phase - 1.0);
            acc += 2.0 * term.im / kappa;
            phase *= step;
        }
        let kn = self.base * self.half() as f64;
        acc + self.nyquist * (kn * x).sin() / kn
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
    }

    fn band_limited(grid: &Grid, rng: &mut ChaCha8Rng, modes: usize) -> RealField {
        let amps: Vec<(f64, f64)> = (0..=modes)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let base = 2.0 * PI / grid.length();
        RealField::from_fn(grid, |x| {
            amps.iter()
                .enumerate()
                .map(|(k, (a, b))| a * (base * k as f64 * x).cos() + b * (base * k as f64 * x).sin())
                .sum()
        })
        .unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(4, 1.0).is_err());
        assert!(Grid::new(100, 1.0).is_err());
        assert!(Grid::new(64, 0.0).is_err());
        assert!(Grid::new(64, f64::NAN).is_err());
        let g = Grid::new(64, 3.0).unwrap();
        assert!((g.spacing() * 64.0 - 3.0).abs() <= f64::EPSILON * 3.0);
    }

    #[test]
    fn sine_derivative_and_laplacian() {
        let grid = Grid::periodic(256).unwrap();
        let w = 2.0 * PI / grid.length();
        let f = RealField::from_fn(&grid, |x| (w * x).sin()).unwrap();
        let df = f.derivative().unwrap();
        let exact: Vec<f64> = grid.points().iter().map(|x| w * (w * x).cos()).collect();
        assert!(max_diff(df.values(), &exact) < 1e-12);
        let lap = f.laplacian().unwrap();
        let exact: Vec<f64> = grid.points().iter().map(|x| -w * w * (w * x).sin()).collect();
        // the symbol amplifies sample rounding by up to n²/4
        assert!(max_diff(lap.values(), &exact) < 1e-11);
    }

    #[test]
    fn constant_has_zero_derivative() {
        let grid = Grid::periodic(64).unwrap();
        let f = RealField::constant(&grid, 2.5).unwrap();
        assert!(f.derivative().unwrap().max_abs() < 1e-14);
        assert!(f.laplacian().unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn complex_exponential_is_eigenfunction() {
        let grid = Grid::periodic(64).unwrap();
        for k in [-31_i32, -5, 0, 1, 17, 31] {
            let f = ComplexField::from_fn(&grid, |x| Complex64::from_polar(1.0, k as f64 * x)).unwrap();
            let df = f.derivative().unwrap();
            let err = df
                .values()
                .iter()
                .zip(f.values())
                .map(|(d, v)| (d - Complex64::new(0.0, k as f64) * v).norm())
                .fold(0.0_f64, f64::max);
            assert!(err < 1e-11, "k = {k}: {err}");
        }
    }

    #[test]
    fn nyquist_derivative_is_zero() {
        let grid = Grid::periodic(32).unwrap();
        let f = RealField::from_fn(&grid, |x| (16.0 * x).cos()).unwrap();
        assert!(f.derivative().unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite_input() {
        let grid = Grid::periodic(8).unwrap();
        assert!(matches!(
            RealField::new(&grid, vec![0.0, 1.0, f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0]),
            Err(Error::NonFinite { index: 2, .. })
        ));
        let f = RealField::constant(&grid, 1.0).unwrap();
        let g = f.map(|v| v / 0.0 * 0.0);
        assert!(g.is_err());
    }

    #[test]
    fn laplacian_matches_composed_derivative() {
        let grid = Grid::periodic(128).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = band_limited(&grid, &mut rng, 20);
        let composed = f.derivative().unwrap().derivative().unwrap();
        assert!(max_diff(composed.values(), f.laplacian().unwrap().values()) < 1e-10);
    }

    #[test]
    fn quadrature() {
        let grid = Grid::new(64, 5.0).unwrap();
        assert!((RealField::constant(&grid, 1.0).unwrap().integrate() - 5.0).abs() < 1e-14);
        let w = 2.0 * PI / 5.0;
        let s = RealField::from_fn(&grid, |x| (w * x).sin()).unwrap();
        assert!(s.integrate().abs() < 1e-14);
    }

    #[test]
    fn gaussian_bump_quadrature_matches_refined_grid() {
        let bump = |x: f64| (-(x - PI).powi(2) / 0.5).exp();
        let coarse = RealField::from_fn(&Grid::periodic(64).unwrap(), bump).unwrap();
        let fine = RealField::from_fn(&Grid::periodic(512).unwrap(), bump).unwrap();
        assert!((coarse.integrate() - fine.integrate()).abs() < 1e-10);
    }

    #[test]
    fn filter_behaviour() {
        let grid = Grid::periodic(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = band_limited(&grid, &mut rng, 10);
        let kept = f.low_pass_filter(2.0 / 3.0).unwrap();
        assert!(max_diff(kept.values(), f.values()) < 1e-13);

        let nyquist = RealField::from_fn(&grid, |x| (32.0 * x).cos()).unwrap();
        assert!(nyquist.low_pass_filter(2.0 / 3.0).unwrap().max_abs() < 1e-14);

        let noise = RealField::new(&grid, (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let filtered = noise.low_pass_filter(2.0 / 3.0).unwrap();
        let spec = filtered.spectrum();
        let raw = noise.spectrum();
        assert!((spec[0] - raw[0]).norm() < 1e-15);
        for (j, c) in spec.iter().enumerate() {
            if grid.mode(j).abs() > 21 {
                assert!(c.norm() < 1e-16, "mode {} leaked {}", grid.mode(j), c.norm());
            }
        }
        assert!(f.low_pass_filter(0.0).is_err());
        assert!(f.low_pass_filter(1.5).is_err());
    }

    #[test]
    fn interpolant_reproduces_band_limited_functions() {
        let grid = Grid::new(64, 4.0).unwrap();
        let w = 2.0 * PI / 4.0;
        let f = RealField::from_fn(&grid, |x| 0.3 + (w * x).sin() + 0.2 * (3.0 * w * x).cos()).unwrap();
        let interp = f.interpolant();
        for &x in &[0.0, 0.123, 1.7, 3.99, -0.5] {
            let (v, d1, d2) = interp.eval_with_derivatives(x);
            assert!((v - (0.3 + (w * x).sin() + 0.2 * (3.0 * w * x).cos())).abs() < 1e-13);
            assert!((d1 - (w * (w * x).cos() - 0.6 * w * (3.0 * w * x).sin())).abs() < 1e-12);
            assert!((d2 - (-w * w * (w * x).sin() - 1.8 * w * w * (3.0 * w * x).cos())).abs() < 1e-11);
            let anti = 0.3 * x + (1.0 - (w * x).cos()) / w + 0.2 * (3.0 * w * x).sin() / (3.0 * w);
            assert!((interp.eval_antiderivative(x) - anti).abs() < 1e-13);
        }
    }

    #[test]
    fn primitive_inverts_derivative() {
        let grid = Grid::periodic(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = band_limited(&grid, &mut rng, 12);
        let df = f.derivative().unwrap();
        let back = grid.primitive(df.values());
        let mean = f.integrate() / grid.length();
        let centered: Vec<f64> = f.values().iter().map(|v| v - mean).collect();
        assert!(max_diff(&back, &centered) < 1e-12);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn trig(grid: &Grid, coeffs: &[(f64, f64)]) -> RealField {
            RealField::from_fn(grid, |x| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, (a, b))| a * (k as f64 * x).cos() + b * (k as f64 * x).sin())
                    .sum()
            })
            .unwrap()
        }

        proptest! {
            #[test]
            fn derivative_is_linear(
                cf in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..16),
                cg in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..16),
                a in -3.0..3.0f64,
                b in -3.0..3.0f64,
            ) {
                let grid = Grid::periodic(64).unwrap();
                let f = trig(&grid, &cf);
                let g = trig(&grid, &cg);
                let combo = f.zip_map(&g, |x, y| a * x + b * y).unwrap();
                for op in [RealField::derivative, RealField::laplacian] {
                    let lhs = op(&combo).unwrap();
                    let rhs = op(&f).unwrap().zip_map(&op(&g).unwrap(), |x, y| a * x + b * y).unwrap();
                    let scale = 1.0 + rhs.max_abs();
                    prop_assert!(max_diff(lhs.values(), rhs.values()) < 1e-12 * scale);
                }
            }

            #[test]
            fn integration_by_parts(
                cf in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..16),
                cg in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..16),
            ) {
                let grid = Grid::periodic(64).unwrap();
                let f = trig(&grid, &cf);
                let g = trig(&grid, &cg);
                prop_assert!(f.derivative().unwrap().integrate().abs() < 1e-12);
                let lhs = f.inner(&g.derivative().unwrap()).unwrap()
                    + g.inner(&f.derivative().unwrap()).unwrap();
                prop_assert!(lhs.abs() < 1e-10);
            }
        }
    }
}
