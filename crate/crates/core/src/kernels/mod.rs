//! Convolution kernels described by their Fourier symbols.
//!
//! A kernel is admissible when `0 ≤ β̂(ξ) ≤ C(1+ξ²)^{−r/2}` with `r ≥ 2`.
//! The evolution operator `Bw = (β ∗ w)_xx` has symbol `−ξ²β̂(ξ)`; the energy
//! operator `P` has symbol `|ξ|⁻¹β̂(ξ)^{−1/2}` and is undefined on the zero mode.
//! On a grid all three are derived from the same evolution multiplier, so
//! `P⁻² = −B` holds exactly on the nonzero modes.

mod quadrature;
mod singular;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use singular::{mildly_singular_b, RadialFn, SingularKernelDescriptor};

use crate::error::{Error, Result};
use crate::grid::{Grid, RealField};

/// Relative tolerance for the zero Fourier mode of fields fed to `P`.
pub const ZERO_MODE_TOL: f64 = 1e-10;

pub type SymbolFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily {
    Exponential,
    HigherOrder { a: f64, b: f64 },
    Gaussian { width: f64 },
    MildlySingular { descriptor: String },
    Custom { name: String },
}

#[derive(Clone)]
enum Symbol {
    Analytic(SymbolFn),
    Singular(Arc<SingularKernelDescriptor>),
}

#[derive(Clone)]
pub struct KernelSpec {
    family: KernelFamily,
    decay_exponent: f64,
    decay_constant: f64,
    symbol: Symbol,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("family", &self.family)
            .field("decay_exponent", &self.decay_exponent)
            .field("decay_constant", &self.decay_constant)
            .finish()
    }
}

impl KernelSpec {
    /// `β̂(ξ) = (1+ξ²)⁻¹`: Green's function of `1 − D_x²`, the improved Boussinesq kernel.
    pub fn exponential() -> Self {
        KernelSpec {
            family: KernelFamily::Exponential,
            decay_exponent: 2.0,
            decay_constant: 1.0,
            symbol: Symbol::Analytic(Arc::new(|xi: f64| 1.0 / (1.0 + xi * xi))),
        }
    }

    /// `β̂(ξ) = (1+aξ²+bξ⁴)⁻¹`: Green's function of `1 − aD_x² + bD_x⁴`.
    pub fn higher_order(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::param("a", format!("{a} must be positive")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::param("b", format!("{b} must be positive")));
        }
        // (1+ξ²)² ≤ max(1, 2/a, 1/b)·(1+aξ²+bξ⁴)
        let c = 1.0_f64.max(2.0 / a).max(1.0 / b);
        Ok(KernelSpec {
            family: KernelFamily::HigherOrder { a, b },
            decay_exponent: 4.0,
            decay_constant: c,
            symbol: Symbol::Analytic(Arc::new(move |xi: f64| {
                let x2 = xi * xi;
                1.0 / (1.0 + a * x2 + b * x2 * x2)
            })),
        })
    }

    /// `β̂(ξ) = exp(−width·ξ²)`, smooth and decaying faster than any power.
    /// The claimed constant is for `r = 4`: `max e^{−wξ²}(1+ξ²)² = 4e^{w−2}/w²` when `w < 2`.
    pub fn gaussian(width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::param("width", format!("{width} must be positive")));
        }
        let c = if width < 2.0 {
            (4.0 * (width - 2.0).exp() / (width * width)).max(1.0)
        } else {
            1.0
        };
        Ok(KernelSpec {
            family: KernelFamily::Gaussian { width },
            decay_exponent: 4.0,
            decay_constant: c,
            symbol: Symbol::Analytic(Arc::new(move |xi: f64| (-width * xi * xi).exp())),
        })
    }

    /// Kernel `γ(|x|)`; grid operators use `γ″ ∗ w − λw` instead of the symbol.
    pub fn mildly_singular(descriptor: Arc<SingularKernelDescriptor>) -> Self {
        KernelSpec {
            family: KernelFamily::MildlySingular {
                descriptor: descriptor.name().to_owned(),
            },
            decay_exponent: 2.0,
            decay_constant: descriptor.decay_constant(),
            symbol: Symbol::Singular(descriptor),
        }
    }

    /// Arbitrary symbol with claimed decay `(r, C)`; certify with [`verify_decay`].
    pub fn custom(name: impl Into<String>, symbol: SymbolFn, r: f64, c: f64) -> Result<Self> {
        if !(r >= 2.0) {
            return Err(Error::param("r", format!("decay exponent {r} must be at least 2")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::param("C", format!("decay constant {c} must be positive")));
        }
        Ok(KernelSpec {
            family: KernelFamily::Custom { name: name.into() },
            decay_exponent: r,
            decay_constant: c,
            symbol: Symbol::Analytic(symbol),
        })
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn decay_exponent(&self) -> f64 {
        self.decay_exponent
    }

    pub fn decay_constant(&self) -> f64 {
        self.decay_constant
    }

    pub fn descriptor(&self) -> Option<&Arc<SingularKernelDescriptor>> {
        match &self.symbol {
            Symbol::Singular(d) => Some(d),
            Symbol::Analytic(_) => None,
        }
    }

    /// `β̂(ξ)`.
    pub fn symbol(&self, xi: f64) -> f64 {
        match &self.symbol {
            Symbol::Analytic(f) => f(xi),
            Symbol::Singular(d) => d.symbol(xi),
        }
    }

    /// Multiplier of `B` on the grid: `−ξ_j²β̂(ξ_j)`, or `γ̂″(ξ_j) − λ` for
    /// mildly singular kernels.
    pub fn evolution_symbol(&self, grid: &Grid) -> Result<Vec<f64>> {
        match &self.symbol {
            Symbol::Analytic(f) => grid.evaluate_symbol(|xi| -xi * xi * f(xi)),
            Symbol::Singular(d) => d.evolution_symbol(grid),
        }
    }

    /// Checks nonnegativity, evenness and the absence of zeros at nonzero grid
    /// frequencies (where `P` would be undefined).
    pub fn validate_on(&self, grid: &Grid) -> Result<()> {
        if let Symbol::Analytic(f) = &self.symbol {
            for &xi in grid.frequencies() {
                let s = f(xi);
                if !s.is_finite() {
                    return Err(Error::NonFiniteSymbol { frequency: xi });
                }
                if s < 0.0 {
                    return Err(Error::param("kernel", format!("symbol {s} is negative at ξ = {xi}")));
                }
                let mirrored = f(-xi);
                if (s - mirrored).abs() > 1e-12 * s.abs().max(mirrored.abs()) {
                    return Err(Error::param("kernel", format!("symbol is not even at ξ = {xi}")));
                }
            }
        }
        let ev = self.evolution_symbol(grid)?;
        for (&xi, &b) in grid.frequencies().iter().zip(&ev) {
            if xi != 0.0 && !(b < 0.0) {
                return Err(Error::SymbolZeroOnGrid { frequency: xi });
            }
        }
        Ok(())
    }

    /// Multiplier of `P`: `(−b_j)^{−1/2}` on nonzero modes, 0 on the zero mode.
    pub fn p_symbol(&self, grid: &Grid) -> Result<Vec<f64>> {
        p_from_evolution(grid, &self.evolution_symbol(grid)?)
    }

    /// Multiplier of `P⁻¹`: `(−b_j)^{1/2} = |ξ|β̂^{1/2}`.
    pub fn p_inv_symbol(&self, grid: &Grid) -> Result<Vec<f64>> {
        Ok(self
            .evolution_symbol(grid)?
            .iter()
            .map(|b| (-b).max(0.0).sqrt())
            .collect())
    }
}

pub(crate) fn p_from_evolution(grid: &Grid, evolution: &[f64]) -> Result<Vec<f64>> {
    grid.frequencies()
        .iter()
        .zip(evolution)
        .map(|(&xi, &b)| {
            if xi == 0.0 {
                Ok(0.0)
            } else if b < 0.0 {
                Ok(1.0 / (-b).sqrt())
            } else {
                Err(Error::SymbolZeroOnGrid { frequency: xi })
            }
        })
        .collect()
}

/// Rejects fields whose mean is not negligible: `|ŵ_0| ≤ tol·(Σ|ŵ_j|²)^{1/2}`.
pub fn check_zero_mode(w: &RealField, tol: f64) -> Result<()> {
    let spectrum = w.grid().forward(w)?;
    let total = spectrum.coefficients().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let zero = spectrum.zero_mode().norm();
    let limit = tol * total;
    if zero > limit {
        Err(Error::ZeroModeViolation {
            coefficient: zero,
            limit,
        })
    } else {
        Ok(())
    }
}

/// `Bw = (β ∗ w)_xx`.
pub fn apply_b(kernel: &KernelSpec, w: &RealField) -> Result<RealField> {
    Ok(w.apply_multiplier(&kernel.evolution_symbol(w.grid())?))
}

/// `Pw`, for fields with negligible mean.
pub fn apply_p(kernel: &KernelSpec, w: &RealField) -> Result<RealField> {
    check_zero_mode(w, ZERO_MODE_TOL)?;
    Ok(w.apply_multiplier(&kernel.p_symbol(w.grid())?))
}

/// `P⁻¹w`.
pub fn apply_p_inv(kernel: &KernelSpec, w: &RealField) -> Result<RealField> {
    Ok(w.apply_multiplier(&kernel.p_inv_symbol(w.grid())?))
}

/// Outcome of a pointwise decay check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub passed: bool,
    pub exponent: f64,
    pub constant: f64,
    pub samples: usize,
    /// Largest of `β̂ − C(1+ξ²)^{−r/2}` and `−β̂` over the samples.
    pub worst_violation: f64,
    pub worst_frequency: f64,
}

/// Checks `0 ≤ β̂(ξ) ≤ C(1+ξ²)^{−r/2}` at every finite sample frequency.
pub fn verify_decay(kernel: &KernelSpec, r: f64, c: f64, frequencies: &[f64]) -> Result<DecayReport> {
    if !(c > 0.0) {
        return Err(Error::param("C", format!("{c} must be positive")));
    }
    let mut samples = 0;
    let mut worst = (f64::NEG_INFINITY, f64::NAN);
    for &xi in frequencies.iter().filter(|x| x.is_finite()) {
        samples += 1;
        let s = kernel.symbol(xi);
        let bound = c * (1.0 + xi * xi).powf(-0.5 * r);
        // relative slack so that equality cases are not flagged by rounding
        let slack = 4.0 * f64::EPSILON * bound;
        let violation = (s - bound - slack).max(-s);
        let violation = if s.is_nan() { f64::INFINITY } else { violation };
        if violation > worst.0 {
            worst = (violation, xi);
        }
    }
    if samples == 0 {
        return Err(Error::EmptySampleSet);
    }
    Ok(DecayReport {
        passed: worst.0 <= 0.0,
        exponent: r,
        constant: c,
        samples,
        worst_violation: worst.0,
        worst_frequency: worst.1,
    })
}

/// Smallest `C` for which the decay bound holds on the samples:
/// `max β̂(ξ)(1+ξ²)^{r/2}`.
pub fn fit_decay_constant(kernel: &KernelSpec, r: f64, frequencies: &[f64]) -> Result<f64> {
    frequencies
        .iter()
        .filter(|x| x.is_finite())
        .map(|&xi| kernel.symbol(xi) * (1.0 + xi * xi).powf(0.5 * r))
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
        .ok_or(Error::EmptySampleSet)
}
