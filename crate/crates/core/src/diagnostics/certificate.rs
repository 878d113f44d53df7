use serde::{Deserialize, Serialize};

use super::{check_grid, energy, p_apply};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::RealField;
use crate::solver::{InitialData, State, WaveSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    NegativeEnergy,
    /// `E(0) > 0` but `A² < E(0)·B`, with `b = −E(0)` and a negative `t₀`.
    PositiveEnergy,
    NotCertified,
}

/// Choice of `(ν, b, t₀)` for `Φ(t) = ‖P₁u₁‖² + ‖P₂u₂‖² + b(t+t₀)²` together
/// with the initial quantities it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupCertificate {
    pub nu: f64,
    pub b: f64,
    pub t0: f64,
    /// `A = ⟨P₁φ₁,P₁ψ₁⟩ + ⟨P₂φ₂,P₂ψ₂⟩`
    pub cross_term: f64,
    /// `B = ‖P₁φ₁‖² + ‖P₂φ₂‖²`
    pub displacement_norm_sq: f64,
    pub initial_energy: f64,
    /// `Φ(0) = B + b t₀²`
    pub phi0: f64,
    /// `Φ′(0) = 2A + 2b t₀`
    pub dphi0: f64,
    /// `Φ(0)/(νΦ′(0))` when certified.
    pub levine_bound: Option<f64>,
    pub status: CertificateStatus,
}

impl BlowupCertificate {
    pub fn is_certified(&self) -> bool {
        self.status != CertificateStatus::NotCertified
    }
}

/// Upper bound `Φ(0)/(νΦ′(0))` on the lifespan of a positive `Φ` with
/// `ΦΦ″ − (1+ν)Φ′² ≥ 0`.
pub fn levine_bound(phi0: f64, dphi0: f64, nu: f64) -> Result<f64> {
    for (name, v) in [("phi0", phi0), ("dphi0", dphi0), ("nu", nu)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::param(name, format!("{v} must be positive")));
        }
    }
    Ok(phi0 / (nu * dphi0))
}

/// Picks `b` and `t₀` from the initial data.
///
/// Negative energy: `b = −E(0)`, `t₀ = max(0, −A/b) + 1`.
/// Positive energy with `A² < E(0)B`: `b = −E(0)`, `t₀ = −√m` where `m` is the
/// midpoint of `(A²/E(0)², B/E(0))`, which gives `Φ(0) > 0` and `Φ′(0) > 0`.
/// Anything else is returned as [`CertificateStatus::NotCertified`].
///
/// The growth condition on `G` is the caller's responsibility (see
/// [`crate::nonlinearity::check_blowup_growth`]).
pub fn build_certificate(init: &InitialData, nu: f64, system: &WaveSystem) -> Result<BlowupCertificate> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::param("nu", format!("{nu} must be positive")));
    }
    let state = init.state();
    check_grid(&state, system)?;
    let [p1, p2] = system.p_symbols();
    let pphi1 = p_apply(&init.phi1, p1)?;
    let pphi2 = p_apply(&init.phi2, p2)?;
    let ppsi1 = p_apply(&init.psi1, p1)?;
    let ppsi2 = p_apply(&init.psi2, p2)?;
    let a = pphi1.inner_product(&ppsi1)? + pphi2.inner_product(&ppsi2)?;
    let b_norm = pphi1.l2_norm().powi(2) + pphi2.l2_norm().powi(2);
    let e0 = energy(&state, system)?.total;

    let (status, b, t0) = if e0 < 0.0 {
        let b = -e0;
        (CertificateStatus::NegativeEnergy, b, (-a / b).max(0.0) + 1.0)
    } else if e0 > 0.0 && a * a < e0 * b_norm {
        let mid = 0.5 * (a * a / (e0 * e0) + b_norm / e0);
        (CertificateStatus::PositiveEnergy, -e0, -mid.sqrt())
    } else {
        (CertificateStatus::NotCertified, -e0, 0.0)
    };
    let phi0 = b_norm + b * t0 * t0;
    let dphi0 = 2.0 * a + 2.0 * b * t0;
    let (status, levine) = match status {
        CertificateStatus::NotCertified => (status, None),
        // rounding can still defeat the sign conditions in degenerate cases
        _ => match levine_bound(phi0, dphi0, nu) {
            Ok(t) => (status, Some(t)),
            Err(_) => (CertificateStatus::NotCertified, None),
        },
    };
    Ok(BlowupCertificate {
        nu,
        b,
        t0,
        cross_term: a,
        displacement_norm_sq: b_norm,
        initial_energy: e0,
        phi0,
        dphi0,
        levine_bound: levine,
        status,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiSample {
    pub t: f64,
    pub phi: f64,
}

/// `Φ` at one state.
pub fn phi_value(state: &State, cert: &BlowupCertificate, system: &WaveSystem) -> Result<f64> {
    check_grid(state, system)?;
    let [p1, p2] = system.p_symbols();
    let n1 = p_apply(&state.u1, p1)?.l2_norm().powi(2);
    let n2 = p_apply(&state.u2, p2)?.l2_norm().powi(2);
    let shift = state.t + cert.t0;
    Ok(n1 + n2 + cert.b * shift * shift)
}

/// `(Φ, Φ′, Φ″)` from the state itself, using `P²B = −1` on mean-free fields:
///
/// ```text
/// Φ′ = 2Σ⟨P_iu_i, P_iu_it⟩ + 2b(t+t₀)
/// Φ″ = 2Σ‖P_iu_it‖² + 2Σ⟨P_iu_i, P_iB_if_i⟩ + 2b
/// ```
pub fn phi_derivatives(state: &State, cert: &BlowupCertificate, system: &WaveSystem) -> Result<(f64, f64, f64)> {
    check_grid(state, system)?;
    let nl = system.nonlinearity();
    let (f1, f2): (Vec<f64>, Vec<f64>) = state
        .u1
        .values()
        .iter()
        .zip(state.u2.values())
        .map(|(&a, &b)| (nl.f1(a, b), nl.f2(a, b)))
        .unzip();
    let f1 = RealField::from_parts(system.grid(), f1);
    let f2 = RealField::from_parts(system.grid(), f2);
    let [p1, p2] = system.p_symbols();
    let [e1, e2] = system.evolution_symbols();
    let mut phi = 0.0;
    let mut dphi = 0.0;
    let mut ddphi = 0.0;
    for (u, v, f, p, e) in [(&state.u1, &state.v1, &f1, p1, e1), (&state.u2, &state.v2, &f2, p2, e2)] {
        let pu = p_apply(u, p)?;
        let pv = p_apply(v, p)?;
        let pe: Vec<f64> = p.iter().zip(e.iter()).map(|(a, b)| a * b).collect();
        let pbf = f.apply_multiplier(&pe);
        phi += pu.l2_norm().powi(2);
        dphi += 2.0 * pu.inner_product(&pv)?;
        ddphi += 2.0 * pv.l2_norm().powi(2) + 2.0 * pu.inner_product(&pbf)?;
    }
    let shift = state.t + cert.t0;
    Ok((
        phi + cert.b * shift * shift,
        dphi + 2.0 * cert.b * shift,
        ddphi + 2.0 * cert.b,
    ))
}

/// `Φ` at each state, evaluated concurrently.
pub fn phi_series(states: &[State], cert: &BlowupCertificate, system: &WaveSystem) -> Result<Vec<PhiSample>> {
    Execution::default()
        .map_slice(states, |s| {
            phi_value(s, cert, system).map(|phi| PhiSample { t: s.t, phi })
        })
        .into_iter()
        .collect()
}
