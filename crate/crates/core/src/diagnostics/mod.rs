//! Conserved energy, the blow-up functional `Φ` with its certificate, and a
//! finite-difference check of the concavity inequality along recorded series.

mod certificate;
mod concavity;

use serde::{Deserialize, Serialize};

pub use certificate::{
    build_certificate, levine_bound, phi_derivatives, phi_series, phi_value, BlowupCertificate, CertificateStatus,
    PhiSample,
};
pub use concavity::{
    resolved_prefix_len, verify_concavity_inequality, ConcavityReport, CONCAVITY_TOL, MIN_SERIES_LEN,
    RESOLVED_GROWTH_PER_SAMPLE,
};

use crate::error::{Error, Result};
use crate::grid::RealField;
use crate::kernels::{check_zero_mode, ZERO_MODE_TOL};
use crate::solver::{State, WaveSystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// `‖P₁u₁t‖²`
    pub kinetic1: f64,
    /// `‖P₂u₂t‖²`
    pub kinetic2: f64,
    /// `2∫F(u₁,u₂)dx`
    pub potential: f64,
    pub total: f64,
}

/// `Pw` through a precomputed multiplier, for fields with negligible mean.
pub(crate) fn p_apply(w: &RealField, p: &[f64]) -> Result<RealField> {
    check_zero_mode(w, ZERO_MODE_TOL)?;
    Ok(w.apply_multiplier(p))
}

fn check_grid(state: &State, system: &WaveSystem) -> Result<()> {
    for f in [&state.u1, &state.u2, &state.v1, &state.v2] {
        if f.grid() != system.grid() {
            return Err(Error::GridMismatch);
        }
    }
    Ok(())
}

/// `E = ‖P₁u₁t‖² + ‖P₂u₂t‖² + 2∫F dx`, with the integral as a `Δx`-weighted
/// nodal sum.
pub fn energy(state: &State, system: &WaveSystem) -> Result<EnergyBreakdown> {
    check_grid(state, system)?;
    let [p1, p2] = system.p_symbols();
    let kinetic1 = p_apply(&state.v1, p1)?.l2_norm().powi(2);
    let kinetic2 = p_apply(&state.v2, p2)?.l2_norm().powi(2);
    let nl = system.nonlinearity();
    let sum: f64 = state
        .u1
        .values()
        .iter()
        .zip(state.u2.values())
        .map(|(&a, &b)| nl.density(a, b))
        .sum();
    let potential = 2.0 * system.grid().dx() * sum;
    Ok(EnergyBreakdown {
        kinetic1,
        kinetic2,
        potential,
        total: kinetic1 + kinetic2 + potential,
    })
}

/// Largest `|E(t) − E(0)| / max(1, |E(0)|)` over a series of states.
pub fn relative_energy_drift<'a>(states: impl IntoIterator<Item = &'a State>, system: &WaveSystem) -> Result<f64> {
    let mut iter = states.into_iter();
    let Some(first) = iter.next() else {
        return Ok(0.0);
    };
    let e0 = energy(first, system)?.total;
    let scale = e0.abs().max(1.0);
    let mut worst = 0.0_f64;
    for s in iter {
        worst = worst.max((energy(s, system)?.total - e0).abs() / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::kernels::KernelSpec;
    use crate::nonlinearity::NonlinearitySpec;
    use crate::solver::InitialData;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn system(nl: NonlinearitySpec) -> WaveSystem {
        let g = Grid::new(64, 2.0 * PI).unwrap();
        WaveSystem::new(&g, KernelSpec::exponential(), KernelSpec::exponential(), nl).unwrap()
    }

    #[test]
    fn zero_state_has_zero_energy() {
        let sys = system(NonlinearitySpec::quartic(-1.0, 0.0));
        let e = energy(&InitialData::zeros(sys.grid()).state(), &sys).unwrap();
        assert_eq!(
            e,
            EnergyBreakdown {
                kinetic1: 0.0,
                kinetic2: 0.0,
                potential: 0.0,
                total: 0.0
            }
        );
    }

    #[test]
    fn cosine_displacement_is_pure_potential() {
        let sys = system(NonlinearitySpec::linear());
        let mut s = InitialData::zeros(sys.grid()).state();
        s.u1 = sys.grid().sample(f64::cos);
        let e = energy(&s, &sys).unwrap();
        assert_abs_diff_eq!(e.total, PI, epsilon = 1e-13);
        assert_eq!(e.kinetic1, 0.0);
    }

    #[test]
    fn cosine_velocity_is_pure_kinetic() {
        let sys = system(NonlinearitySpec::linear());
        let mut s = InitialData::zeros(sys.grid()).state();
        s.v1 = sys.grid().sample(f64::cos);
        let e = energy(&s, &sys).unwrap();
        // P cos = √2 cos
        assert_abs_diff_eq!(e.kinetic1, 2.0 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(e.total, 2.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn velocity_with_mean_is_rejected() {
        let sys = system(NonlinearitySpec::linear());
        let mut s = InitialData::zeros(sys.grid()).state();
        s.v2 = sys.grid().sample(|x| 1.0 + x.cos());
        assert!(matches!(energy(&s, &sys), Err(Error::ZeroModeViolation { .. })));
    }

    #[test]
    fn total_is_sum_of_parts() {
        let sys = system(NonlinearitySpec::quartic(1.0, 2.0));
        let g = sys.grid();
        let s = InitialData::new(
            g.sample(|x| 0.3 * x.sin()),
            g.sample(|x| 0.2 * (2.0 * x).cos()),
            g.sample(|x| 0.1 * (3.0 * x).cos()),
            g.sample(|x| -0.4 * x.sin()),
        )
        .unwrap()
        .state();
        let e = energy(&s, &sys).unwrap();
        assert_eq!(e.total, e.kinetic1 + e.kinetic2 + e.potential);
        assert!(e.kinetic1 > 0.0 && e.kinetic2 > 0.0);
    }
}
