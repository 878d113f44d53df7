use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_SERIES_LEN: usize = 5;

/// Default tolerance on the normalised margin. A margin of order `h²`
/// (the signature of `e^{ct}`-type growth) still registers as a failure at
/// the step sizes used in practice.
pub const CONCAVITY_TOL: f64 = 1e-9;

/// Default cap on the relative change of `Φ` per sample for [`resolved_prefix_len`].
pub const RESOLVED_GROWTH_PER_SAMPLE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub nu: f64,
    pub dt: f64,
    pub tol: f64,
    /// Interior points examined.
    pub points: usize,
    /// Smallest `(ΦΦ″ − (1+ν)Φ′²)/max(1, Φ²/dt²)` over interior points.
    pub worst_margin: f64,
    /// Index into the input series of the worst point.
    pub worst_index: usize,
    pub passed: bool,
}

/// Checks `ΦΦ″ − (1+ν)Φ′² ≥ −tol·max(1, Φ²/dt²)` on a uniformly spaced
/// series, with central differences at interior points.
pub fn verify_concavity_inequality(phi: &[f64], nu: f64, dt: f64, tol: f64) -> Result<ConcavityReport> {
    if phi.len() < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort {
            found: phi.len(),
            required: MIN_SERIES_LEN,
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", format!("{dt} must be positive")));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::param("nu", format!("{nu} must be positive")));
    }
    if !(tol >= 0.0) {
        return Err(Error::param("tol", format!("{tol} must be nonnegative")));
    }

    let mut worst = f64::INFINITY;
    let mut worst_index = 1;
    for k in 1..phi.len() - 1 {
        let (a, p, c) = (phi[k - 1], phi[k], phi[k + 1]);
        let d1 = (c - a) / (2.0 * dt);
        let d2 = (c - 2.0 * p + a) / (dt * dt);
        let scale = (p * p / (dt * dt)).max(1.0);
        let margin = (p * d2 - (1.0 + nu) * d1 * d1) / scale;
        // NaN counts as the worst possible margin
        if !(margin >= worst) {
            worst = margin;
            worst_index = k;
        }
    }
    let worst = if worst.is_nan() { f64::NEG_INFINITY } else { worst };
    Ok(ConcavityReport {
        nu,
        dt,
        tol,
        points: phi.len() - 2,
        worst_margin: worst,
        worst_index,
        passed: worst >= -tol,
    })
}

/// Number of leading samples over which `Φ` changes by at most a relative
/// `max_growth` per sample, judged by central differences.
///
/// Near a singularity at `t₁` the differences have error of order
/// `(dt/(t₁−t))⁴`, which eventually swamps any true margin; beyond this prefix
/// the sampled series no longer resolves `Φ` and the check is meaningless.
pub fn resolved_prefix_len(phi: &[f64], max_growth: f64) -> usize {
    if phi.len() < 3 {
        return phi.len();
    }
    let mut k = 1;
    while k + 1 < phi.len() {
        let growth = 0.5 * (phi[k + 1] - phi[k - 1]).abs() / phi[k].abs();
        if !(growth <= max_growth) {
            break;
        }
        k += 1;
    }
    // the last accepted interior point needs its right neighbour
    (k + 1).min(phi.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(f: impl Fn(f64) -> f64, dt: f64, count: usize) -> Vec<f64> {
        (0..count).map(|k| f(k as f64 * dt)).collect()
    }

    #[test]
    fn exponential_growth_fails() {
        let phi = sample(|t| (2.0 * t).exp(), 1e-3, 200);
        let r = verify_concavity_inequality(&phi, 0.5, 1e-3, CONCAVITY_TOL).unwrap();
        // −2e^{4t}/(e^{4t}/h²) = −2h²
        assert!((r.worst_margin + 2e-6).abs() < 1e-8, "{}", r.worst_margin);
        assert!(!r.passed);
    }

    #[test]
    fn quadratic_growth_fails() {
        let phi = sample(|t| (t + 1.0).powi(2), 1e-2, 100);
        let r = verify_concavity_inequality(&phi, 0.05, 1e-2, CONCAVITY_TOL).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn saturating_ansatz_margin_vanishes_with_dt() {
        let (t1, nu) = (1.0, 0.5);
        let ansatz = |t: f64| (t1 - t).powf(-1.0 / nu);
        let mut previous = f64::INFINITY;
        for &dt in &[1e-2, 5e-3, 2.5e-3, 1.25e-3] {
            let count = (0.8 / dt) as usize + 1;
            let r = verify_concavity_inequality(&sample(ansatz, dt, count), nu, dt, CONCAVITY_TOL).unwrap();
            let magnitude = r.worst_margin.abs();
            assert!(magnitude <= 0.5 * previous, "dt {dt}: {magnitude} vs {previous}");
            previous = magnitude;
        }
        // the leading error is −14h⁴/τ⁴ for ν = ½, τ = t₁ − t
        assert!(previous < 14.0 * (1.25e-3_f64 / 0.2).powi(4) * 1.1);
    }

    #[test]
    fn resolved_prefix_rescues_sampled_singularity() {
        // Φ = (1−t)⁻² satisfies the inequality strictly for ν = 0.4
        let dt = 1e-3;
        let phi = sample(|t| (1.0 - t).powi(-2), dt, 999);
        let full = verify_concavity_inequality(&phi, 0.4, dt, CONCAVITY_TOL).unwrap();
        assert!(!full.passed);
        let k = resolved_prefix_len(&phi, RESOLVED_GROWTH_PER_SAMPLE);
        // dt·Φ′/Φ = 2dt/(1−t) ≤ 0.01 up to t = 0.8
        assert!((799..=802).contains(&k), "{k}");
        assert!(
            verify_concavity_inequality(&phi[..k], 0.4, dt, CONCAVITY_TOL)
                .unwrap()
                .passed
        );
        assert_eq!(resolved_prefix_len(&[1.0, 1.0], 0.01), 2);
        assert_eq!(resolved_prefix_len(&[1.0; 10], 0.01), 10);
    }

    #[test]
    fn short_series_rejected() {
        assert_eq!(
            verify_concavity_inequality(&[1.0; 4], 0.5, 0.1, CONCAVITY_TOL).unwrap_err(),
            Error::SeriesTooShort { found: 4, required: 5 }
        );
        assert!(verify_concavity_inequality(&[1.0; 5], 0.5, 0.0, CONCAVITY_TOL).is_err());
    }

    #[test]
    fn nan_fails() {
        let phi = [1.0, 2.0, f64::NAN, 4.0, 5.0];
        assert!(
            !verify_concavity_inequality(&phi, 0.5, 0.1, CONCAVITY_TOL)
                .unwrap()
                .passed
        );
    }
}
