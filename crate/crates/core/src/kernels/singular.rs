//! Mildly singular kernels `β(x) = γ(|x|)` with a derivative jump at the origin.
//!
//! For these `(β ∗ w)_xx = γ″ ∗ w − λw` with `λ = −2γ′(0)`: the Dirac part of
//! `β″` is carried exactly by the `−λw` term and only the integrable part
//! `γ″(|x|)` is transformed numerically.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use super::quadrature::{even_cosine_transform, romberg};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::{Grid, RealField};

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

type SymbolCache = HashMap<(usize, u64), Arc<[f64]>>;

pub struct SingularKernelDescriptor {
    name: String,
    gamma: RadialFn,
    gamma_second: RadialFn,
    gamma_at_zero: f64,
    gamma_prime_at_zero: f64,
    lambda: f64,
    radius: f64,
    // γ̂″ on the grid frequencies, keyed by (n, period bits)
    cache: RwLock<SymbolCache>,
}

impl fmt::Debug for SingularKernelDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SingularKernelDescriptor")
            .field("name", &self.name)
            .field("gamma_at_zero", &self.gamma_at_zero)
            .field("gamma_prime_at_zero", &self.gamma_prime_at_zero)
            .field("lambda", &self.lambda)
            .field("radius", &self.radius)
            .finish()
    }
}

impl SingularKernelDescriptor {
    /// `gamma` and `gamma_second` are functions of `ρ = |x| ≥ 0`. `radius` bounds
    /// the support used when the symbol is evaluated off-grid.
    pub fn new(
        name: impl Into<String>,
        gamma: RadialFn,
        gamma_second: RadialFn,
        gamma_prime_at_zero: f64,
        radius: f64,
    ) -> Result<Self> {
        let gamma_at_zero = gamma(0.0);
        if !(gamma_at_zero > 0.0 && gamma_at_zero.is_finite()) {
            return Err(Error::param(
                "gamma",
                format!("γ(0) = {gamma_at_zero} must be positive"),
            ));
        }
        if !(gamma_prime_at_zero < 0.0 && gamma_prime_at_zero.is_finite()) {
            return Err(Error::param(
                "gamma_prime_at_zero",
                format!("γ′(0) = {gamma_prime_at_zero} must be negative"),
            ));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param("radius", format!("{radius} must be positive")));
        }
        Ok(SingularKernelDescriptor {
            name: name.into(),
            gamma,
            gamma_second,
            gamma_at_zero,
            gamma_prime_at_zero,
            lambda: -2.0 * gamma_prime_at_zero,
            radius,
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// `γ(ρ) = ½e^{−ρ}`, the Green's function of `1 − D_x²`.
    pub fn exponential() -> Self {
        Self::new(
            "exponential",
            Arc::new(|r: f64| 0.5 * (-r).exp()),
            Arc::new(|r: f64| 0.5 * (-r).exp()),
            -0.5,
            60.0,
        )
        .expect("valid built-in descriptor")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma_at_zero(&self) -> f64 {
        self.gamma_at_zero
    }

    pub fn gamma_prime_at_zero(&self) -> f64 {
        self.gamma_prime_at_zero
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn gamma(&self, rho: f64) -> f64 {
        (self.gamma)(rho)
    }

    pub fn gamma_second(&self, rho: f64) -> f64 {
        (self.gamma_second)(rho)
    }

    /// `β̂(ξ) = 2∫_0^R γ(ρ)cos(ξρ)dρ` over the descriptor's support radius.
    pub fn symbol(&self, xi: f64) -> f64 {
        even_cosine_transform(&*self.gamma, xi, self.radius)
    }

    /// `2∫_0^R |f|` for the L¹ norms used in the decay constant.
    fn l1_norm(&self, f: &RadialFn) -> f64 {
        let panels = 64 + (self.radius * 8.0) as usize;
        2.0 * romberg(|r| f(r).abs(), 0.0, self.radius, panels, 1e-12)
    }

    /// A decay constant valid for `r = 2`:
    /// `β̂(ξ) ≤ 2·max(λ + ‖γ″‖₁, ‖γ‖₁)·(1+ξ²)⁻¹`.
    pub fn decay_constant(&self) -> f64 {
        let g1 = self.l1_norm(&self.gamma);
        let g2 = self.l1_norm(&self.gamma_second);
        2.0 * (self.lambda + g2).max(g1)
    }

    /// `γ̂″(ξ_j)` over the truncation window `[−L/2, L/2]`, computed once per grid.
    pub fn second_derivative_symbol(&self, grid: &Grid) -> Result<Arc<[f64]>> {
        self.second_derivative_symbol_with(grid, Execution::default())
    }

    pub fn second_derivative_symbol_with(&self, grid: &Grid, exec: Execution) -> Result<Arc<[f64]>> {
        let key = (grid.n(), grid.period().to_bits());
        if let Some(hit) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let computed = self.compute_second_derivative_symbol(grid, exec)?;
        let mut cache = self.cache.write().expect("cache lock");
        Ok(cache.entry(key).or_insert(computed).clone())
    }

    /// Uncached quadrature; the cached accessor wraps this.
    pub fn compute_second_derivative_symbol(&self, grid: &Grid, exec: Execution) -> Result<Arc<[f64]>> {
        let n = grid.n();
        let half_window = 0.5 * grid.period();
        let freqs = grid.frequencies();
        // the symbol is even, so only |ξ_j| for j = 0..=n/2 is integrated
        let half: Vec<f64> = exec.map_indexed(n / 2 + 1, |j| {
            even_cosine_transform(&*self.gamma_second, freqs[j].abs(), half_window)
        });
        if half.iter().any(|v| !v.is_finite()) {
            return Err(Error::QuadratureOverflow { what: "γ″" });
        }
        let full: Vec<f64> = (0..n).map(|j| half[if j <= n / 2 { j } else { n - j }]).collect();
        Ok(full.into())
    }

    /// Multiplier of `w ↦ γ″ ∗ w − λw` on the grid.
    pub fn evolution_symbol(&self, grid: &Grid) -> Result<Vec<f64>> {
        let lambda = self.lambda;
        let mut symbol: Vec<f64> = self
            .second_derivative_symbol(grid)?
            .iter()
            .map(|g| g - lambda)
            .collect();
        // 2∫γ″ = λ exactly; quadrature leaves a residue that would feed the mean
        symbol[0] = 0.0;
        Ok(symbol)
    }
}

/// `(β ∗ w)_xx` for a mildly singular kernel, as `γ″ ∗ w − λw`.
pub fn mildly_singular_b(descriptor: &SingularKernelDescriptor, w: &RealField) -> Result<RealField> {
    let gamma_hat = descriptor.second_derivative_symbol(w.grid())?;
    let convolved = w.apply_multiplier(&gamma_hat);
    convolved.combine(1.0, w, -descriptor.lambda())
}
