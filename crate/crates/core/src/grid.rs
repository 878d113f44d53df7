//! Periodic grid, discrete Fourier transforms, multiplier operators and the
//! norm suite.
//!
//! The line is replaced by the periodic cell `[-L/2, L/2)` sampled at `n`
//! equispaced nodes. Norms carry the `Δx` weight so that they converge to the
//! continuum integrals under refinement.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct GridInner {
    n: usize,
    period: f64,
    frequencies: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Periodic grid with cached FFT plans. Cloning is cheap.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.inner.n)
            .field("period", &self.inner.period)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n && self.inner.period.to_bits() == other.inner.period.to_bits())
    }
}

impl Grid {
    pub fn new(n: usize, period: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "node count {n} must be a power of two and at least 4"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!("period {period} must be positive")));
        }
        let scale = 2.0 * std::f64::consts::PI / period;
        let half = n / 2;
        // standard FFT ordering; the Nyquist index n/2 carries the negative frequency
        let frequencies = (0..n)
            .map(|j| {
                let k = if j < half { j as f64 } else { j as f64 - n as f64 };
                k * scale
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Grid {
            inner: Arc::new(GridInner {
                n,
                period,
                frequencies,
                forward,
                inverse,
            }),
        })
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn period(&self) -> f64 {
        self.inner.period
    }

    pub fn dx(&self) -> f64 {
        self.inner.period / self.inner.n as f64
    }

    /// Discrete frequencies `ξ_j = 2πk/L` in FFT ordering.
    pub fn frequencies(&self) -> &[f64] {
        &self.inner.frequencies
    }

    /// Largest resolved frequency magnitude, `πn/L`.
    pub fn max_frequency(&self) -> f64 {
        std::f64::consts::PI * self.inner.n as f64 / self.inner.period
    }

    /// Node `x_j = -L/2 + jΔx`.
    pub fn node(&self, j: usize) -> f64 {
        -0.5 * self.inner.period + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.inner.n).map(move |j| self.node(j))
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> RealField {
        RealField {
            grid: self.clone(),
            values: self.nodes().map(f).collect(),
        }
    }

    pub fn zeros(&self) -> RealField {
        RealField {
            grid: self.clone(),
            values: vec![0.0; self.inner.n],
        }
    }

    pub fn constant(&self, c: f64) -> RealField {
        RealField {
            grid: self.clone(),
            values: vec![c; self.inner.n],
        }
    }

    /// Evaluates a real symbol at every grid frequency, rejecting NaN/Inf.
    pub fn evaluate_symbol(&self, symbol: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        self.frequencies()
            .iter()
            .map(|&xi| {
                let s = symbol(xi);
                if s.is_finite() {
                    Ok(s)
                } else {
                    Err(Error::NonFiniteSymbol { frequency: xi })
                }
            })
            .collect()
    }

    pub(crate) fn forward_values(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.inner.forward.process(&mut buf);
        buf
    }

    /// Inverse transform keeping the real part. The `1/n` normalisation is applied here.
    pub(crate) fn inverse_values(&self, mut coefficients: Vec<Complex64>) -> Vec<f64> {
        self.inner.inverse.process(&mut coefficients);
        let norm = 1.0 / self.inner.n as f64;
        coefficients.into_iter().map(|c| c.re * norm).collect()
    }

    /// `F⁻¹(m · F(values))` for a precomputed real multiplier.
    pub(crate) fn multiply_values(&self, values: &[f64], multiplier: &[f64]) -> Vec<f64> {
        let mut spectrum = self.forward_values(values);
        for (c, &m) in spectrum.iter_mut().zip(multiplier) {
            *c *= m;
        }
        self.inverse_values(spectrum)
    }

    pub fn forward(&self, u: &RealField) -> Result<SpectralField> {
        self.check(u)?;
        Ok(SpectralField {
            grid: self.clone(),
            coefficients: self.forward_values(&u.values),
        })
    }

    pub fn inverse(&self, s: &SpectralField) -> Result<RealField> {
        if s.grid != *self {
            return Err(Error::GridMismatch);
        }
        Ok(RealField {
            grid: self.clone(),
            values: self.inverse_values(s.coefficients.clone()),
        })
    }

    fn check(&self, u: &RealField) -> Result<()> {
        if u.grid != *self {
            Err(Error::GridMismatch)
        } else {
            Ok(())
        }
    }
}

/// `n` real samples on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                found: values.len(),
            });
        }
        Ok(RealField {
            grid: grid.clone(),
            values,
        })
    }

    pub(crate) fn from_parts(grid: &Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        RealField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealField {
        RealField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &RealField, b: f64) -> Result<RealField> {
        self.same_grid(other)?;
        Ok(RealField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    pub fn scale(&self, a: f64) -> RealField {
        self.map(|v| a * v)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// The field minus its mean.
    pub fn centered(&self) -> RealField {
        let m = self.mean();
        self.map(|v| v - m)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.dx() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| {
            if m.is_nan() || v.is_nan() {
                f64::NAN
            } else {
                m.max(v.abs())
            }
        })
    }

    /// `(Σ (1+ξ_j²)^s |û_j|² · L/n²)^{1/2}`; equals `l2_norm` at `s = 0`.
    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::param("s", format!("Sobolev index {s} must be nonnegative")));
        }
        let spectrum = self.grid.forward_values(&self.values);
        let n = self.grid.n() as f64;
        let weight = self.grid.period() / (n * n);
        let sum: f64 = spectrum
            .iter()
            .zip(self.grid.frequencies())
            .map(|(c, &xi)| (1.0 + xi * xi).powf(s) * c.norm_sqr())
            .sum();
        Ok((weight * sum).sqrt())
    }

    /// `Δx Σ u_j v_j`.
    pub fn inner_product(&self, other: &RealField) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self.grid.dx() * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>())
    }

    /// Multiplier operator with a real symbol σ(ξ).
    ///
    /// The result is the real part of the inverse transform, which for an
    /// even symbol is exact and for a non-even one is the action of the
    /// even part `(σ(ξ)+σ(-ξ))/2`.
    pub fn apply_symbol(&self, symbol: impl Fn(f64) -> f64) -> Result<RealField> {
        let multiplier = self.grid.evaluate_symbol(symbol)?;
        Ok(self.apply_multiplier(&multiplier))
    }

    pub(crate) fn apply_multiplier(&self, multiplier: &[f64]) -> RealField {
        RealField {
            grid: self.grid.clone(),
            values: self.grid.multiply_values(&self.values, multiplier),
        }
    }

    /// `D_x^order u`, applied as `(iξ)^order`. The Nyquist mode is dropped for
    /// odd orders so that the output stays real.
    pub fn derivative(&self, order: u32) -> RealField {
        let nyquist = self.grid.n() / 2;
        let mut spectrum = self.grid.forward_values(&self.values);
        for (j, (c, &xi)) in spectrum.iter_mut().zip(self.grid.frequencies()).enumerate() {
            if order % 2 == 1 && j == nyquist {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c *= Complex64::new(0.0, xi).powu(order);
            }
        }
        RealField {
            grid: self.grid.clone(),
            values: self.grid.inverse_values(spectrum),
        }
    }

    fn same_grid(&self, other: &RealField) -> Result<()> {
        if self.grid != other.grid {
            Err(Error::GridMismatch)
        } else {
            Ok(())
        }
    }
}

/// Fourier coefficients of a real field (unnormalised forward DFT).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coefficients: Vec<Complex64>,
}

impl SpectralField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.coefficients[0]
    }

    /// Multiplies every coefficient by a real multiplier value.
    pub fn multiply(&self, multiplier: &[f64]) -> Result<SpectralField> {
        if multiplier.len() != self.coefficients.len() {
            return Err(Error::LengthMismatch {
                expected: self.coefficients.len(),
                found: multiplier.len(),
            });
        }
        Ok(SpectralField {
            grid: self.grid.clone(),
            coefficients: self.coefficients.iter().zip(multiplier).map(|(c, &m)| c * m).collect(),
        })
    }

    /// Largest `|c_k - conj(c_{n-k})|` relative to the largest coefficient.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let n = self.coefficients.len();
        let scale = self
            .coefficients
            .iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        (0..n)
            .map(|k| (self.coefficients[k] - self.coefficients[(n - k) % n].conj()).norm())
            .fold(0.0_f64, f64::max)
            / scale
    }

    /// `L/n² Σ |c_j|²`, the squared L² norm computed on the frequency side.
    pub fn l2_norm_sq(&self) -> f64 {
        let n = self.grid.n() as f64;
        self.grid.period() / (n * n) * self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn circle(n: usize) -> Grid {
        Grid::new(n, 2.0 * PI).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(3, 1.0).is_err());
        assert!(Grid::new(2, 1.0).is_err());
        assert!(Grid::new(12, 1.0).is_err());
        assert!(Grid::new(16, 0.0).is_err());
        assert!(Grid::new(16, f64::NAN).is_err());
        assert!(Grid::new(4, 1.0).is_ok());
    }

    #[test]
    fn single_zero_frequency() {
        let g = circle(32);
        assert_eq!(g.frequencies().iter().filter(|&&x| x == 0.0).count(), 1);
        assert_abs_diff_eq!(g.frequencies()[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.frequencies()[16], -16.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_symbol() {
        let g = circle(64);
        let u = g.sample(|x| (x.sin() * 3.0).exp());
        let v = u.apply_symbol(|_| 1.0).unwrap();
        for (a, b) in u.values().iter().zip(v.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn resolvent_symbol_halves_cosine() {
        let g = circle(32);
        let v = g.sample(f64::cos).apply_symbol(|xi| 1.0 / (1.0 + xi * xi)).unwrap();
        for (x, val) in g.nodes().zip(v.values()) {
            assert_abs_diff_eq!(*val, 0.5 * x.cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn second_derivative_symbol() {
        let g = circle(32);
        let v = g.sample(f64::sin).apply_symbol(|xi| -xi * xi).unwrap();
        for (x, val) in g.nodes().zip(v.values()) {
            assert_abs_diff_eq!(*val, -x.sin(), epsilon = 1e-13);
        }
        let d = g.sample(f64::sin).derivative(1);
        for (x, val) in g.nodes().zip(d.values()) {
            assert_abs_diff_eq!(*val, x.cos(), epsilon = 1e-13);
        }
    }

    #[test]
    fn rejects_non_finite_symbol() {
        let g = circle(16);
        let err = g.sample(f64::cos).apply_symbol(|xi| 1.0 / xi).unwrap_err();
        assert_eq!(err, Error::NonFiniteSymbol { frequency: 0.0 });
    }

    #[test]
    fn norms_of_cosine() {
        let g = circle(64);
        let u = g.sample(f64::cos);
        assert_abs_diff_eq!(u.l2_norm(), PI.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(u.sobolev_norm(1.0).unwrap(), (2.0 * PI).sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(u.sobolev_norm(0.0).unwrap(), PI.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(u.sup_norm(), 1.0, epsilon = 1e-15);
        assert!(u.sobolev_norm(-1.0).is_err());
    }

    #[test]
    fn inner_products() {
        let g = circle(64);
        let c = g.sample(f64::cos);
        let s = g.sample(f64::sin);
        assert_abs_diff_eq!(c.inner_product(&s).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.inner_product(&c).unwrap(), PI, epsilon = 1e-13);
        assert_eq!(c.inner_product(&g.zeros()).unwrap(), 0.0);
        let other = circle(32).zeros();
        assert_eq!(c.inner_product(&other), Err(Error::GridMismatch));
    }

    #[test]
    fn forward_of_real_field_is_conjugate_symmetric() {
        let g = circle(32);
        let s = g
            .forward(&g.sample(|x| (x.cos() + 0.3 * (2.0 * x).sin()).exp()))
            .unwrap();
        assert!(s.conjugate_asymmetry() < 1e-14);
        let back = g.inverse(&s).unwrap();
        assert_abs_diff_eq!(
            back.values()[5],
            (g.node(5).cos() + 0.3 * (2.0 * g.node(5)).sin()).exp(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn nan_is_detected() {
        let g = circle(8);
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        let u = RealField::new(&g, v).unwrap();
        assert!(!u.is_finite());
        assert!(u.sup_norm().is_nan());
        assert!(RealField::new(&g, vec![0.0; 7]).is_err());
    }
}
