//! Nonlinear data `G`, `(g₁, g₂) = ∇G`, and the derived `F = ½(u₁²+u₂²) + G`,
//! `f_i = u_i + g_i`.

mod hypotheses;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use hypotheses::{
    check_blowup_growth, check_exactness, check_global_g_bound, check_global_g_power_bound, check_gradient_consistency,
    HypothesisReport, SampleBox, Tolerance,
};

use crate::error::{Error, Result};

pub type PlaneFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NonlinearityFamily {
    /// `G ≡ 0`.
    Linear,
    /// `G = κ₁(u₁⁴+u₂⁴)/4 + κ₂u₁²u₂²/2`.
    Quartic {
        kappa1: f64,
        kappa2: f64,
    },
    /// `G = ½W(u₁²+u₂²)` with `W(s) = κ s^p / p`.
    IsotropicPower {
        kappa: f64,
        p: f64,
    },
    /// `G = ½W(u₁²+u₂²)` for a user-supplied `W`.
    Isotropic {
        label: String,
    },
    Custom {
        label: String,
    },
}

#[derive(Clone)]
pub struct NonlinearitySpec {
    family: NonlinearityFamily,
    potential: PlaneFn,
    g1: PlaneFn,
    g2: PlaneFn,
}

impl fmt::Debug for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearitySpec")
            .field("family", &self.family)
            .finish()
    }
}

impl NonlinearitySpec {
    pub fn linear() -> Self {
        let zero: PlaneFn = Arc::new(|_, _| 0.0);
        NonlinearitySpec {
            family: NonlinearityFamily::Linear,
            potential: zero.clone(),
            g1: zero.clone(),
            g2: zero,
        }
    }

    /// `κ₁ < 0, κ₂ = 0` is focusing (finite-time blow-up for negative energy);
    /// `κ₁ > 0, κ₂ ≥ 0` is defocusing.
    pub fn quartic(kappa1: f64, kappa2: f64) -> Self {
        NonlinearitySpec {
            family: NonlinearityFamily::Quartic { kappa1, kappa2 },
            potential: Arc::new(move |a, b| {
                let (a2, b2) = (a * a, b * b);
                kappa1 * (a2 * a2 + b2 * b2) / 4.0 + kappa2 * a2 * b2 / 2.0
            }),
            g1: Arc::new(move |a, b| kappa1 * a * a * a + kappa2 * a * b * b),
            g2: Arc::new(move |a, b| kappa1 * b * b * b + kappa2 * a * a * b),
        }
    }

    /// `g_i = u_i W′(u₁²+u₂²)`, `G = ½W(u₁²+u₂²)`; exact by construction.
    pub fn isotropic(label: impl Into<String>, w: ScalarFn, w_prime: ScalarFn) -> Self {
        Self::isotropic_tagged(NonlinearityFamily::Isotropic { label: label.into() }, w, w_prime)
    }

    /// `W(s) = κ s^p / p`, `p ≥ 1`. `p = 2` reproduces `quartic(κ, κ)`.
    pub fn isotropic_power(kappa: f64, p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::param("p", format!("exponent {p} must be at least 1")));
        }
        Ok(Self::isotropic_tagged(
            NonlinearityFamily::IsotropicPower { kappa, p },
            Arc::new(move |s: f64| kappa * s.powf(p) / p),
            Arc::new(move |s: f64| kappa * s.powf(p - 1.0)),
        ))
    }

    fn isotropic_tagged(family: NonlinearityFamily, w: ScalarFn, w_prime: ScalarFn) -> Self {
        let w_prime2 = w_prime.clone();
        NonlinearitySpec {
            family,
            potential: Arc::new(move |a, b| 0.5 * w(a * a + b * b)),
            g1: Arc::new(move |a, b| a * w_prime(a * a + b * b)),
            g2: Arc::new(move |a, b| b * w_prime2(a * a + b * b)),
        }
    }

    /// User-supplied `G` and gradient. Exactness is not assumed; certify it with
    /// [`check_exactness`] and [`check_gradient_consistency`].
    pub fn custom(label: impl Into<String>, potential: PlaneFn, g1: PlaneFn, g2: PlaneFn) -> Result<Self> {
        let spec = NonlinearitySpec {
            family: NonlinearityFamily::Custom { label: label.into() },
            potential,
            g1,
            g2,
        };
        if spec.g1(0.0, 0.0) != 0.0 || spec.g2(0.0, 0.0) != 0.0 {
            return Err(Error::param("g", "g_i(0,0) must vanish"));
        }
        if spec.potential(0.0, 0.0) != 0.0 {
            return Err(Error::param("G", "G(0,0) must vanish"));
        }
        Ok(spec)
    }

    pub fn family(&self) -> &NonlinearityFamily {
        &self.family
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.family, NonlinearityFamily::Linear)
            || matches!(self.family, NonlinearityFamily::Quartic { kappa1, kappa2 } if kappa1 == 0.0 && kappa2 == 0.0)
    }

    /// `G(a, b)`.
    #[inline]
    pub fn potential(&self, a: f64, b: f64) -> f64 {
        (self.potential)(a, b)
    }

    #[inline]
    pub fn g1(&self, a: f64, b: f64) -> f64 {
        (self.g1)(a, b)
    }

    #[inline]
    pub fn g2(&self, a: f64, b: f64) -> f64 {
        (self.g2)(a, b)
    }

    /// `f₁ = u₁ + g₁`.
    #[inline]
    pub fn f1(&self, a: f64, b: f64) -> f64 {
        a + self.g1(a, b)
    }

    #[inline]
    pub fn f2(&self, a: f64, b: f64) -> f64 {
        b + self.g2(a, b)
    }

    /// `F = ½(a²+b²) + G(a,b)`.
    #[inline]
    pub fn density(&self, a: f64, b: f64) -> f64 {
        0.5 * (a * a + b * b) + self.potential(a, b)
    }
}
