use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use nlwave::kernels::{apply_b, apply_p, apply_p_inv};
use nlwave::{Grid, KernelSpec, RealField};
use proptest::prelude::*;

/// `Σ a_k cos(kx + θ_k)` on `[−π, π)`, band-limited well inside the grid.
fn band_limited(grid: &Grid, modes: &[(f64, f64)]) -> RealField {
    let scale = 2.0 * PI / grid.period();
    grid.sample(|x| {
        modes
            .iter()
            .enumerate()
            .map(|(k, &(a, theta))| a * ((k as f64 + 1.0) * scale * x + theta).cos())
            .sum()
    })
}

fn modes(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, 0.0..(2.0 * PI)), 1..=max)
}

fn sup_diff(a: &RealField, b: &RealField) -> f64 {
    a.combine(1.0, b, -1.0).unwrap().sup_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn fft_round_trip(values in prop::collection::vec(-10.0..10.0f64, 64)) {
        let g = Grid::new(64, 7.0).unwrap();
        let u = RealField::new(&g, values).unwrap();
        let back = g.inverse(&g.forward(&u).unwrap()).unwrap();
        prop_assert!(sup_diff(&u, &back) <= 1e-12);
    }

    #[test]
    fn parseval(values in prop::collection::vec(-3.0..3.0f64, 32)) {
        let g = Grid::new(32, 5.0).unwrap();
        let u = RealField::new(&g, values).unwrap();
        let spectral = g.forward(&u).unwrap();
        // Δx Σ u² = (L/n²) Σ |û|²
        let lhs = u.l2_norm().powi(2);
        let rhs = spectral.l2_norm_sq();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
        prop_assert!((u.sobolev_norm(0.0).unwrap() - u.l2_norm()).abs() <= 1e-12 * lhs.max(1.0));
    }

    #[test]
    fn transform_is_linear(m1 in modes(6), m2 in modes(6), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let g = Grid::new(32, 2.0 * PI).unwrap();
        let (u, v) = (band_limited(&g, &m1), band_limited(&g, &m2));
        let lhs = g.forward(&u.combine(a, &v, b).unwrap()).unwrap();
        let (fu, fv) = (g.forward(&u).unwrap(), g.forward(&v).unwrap());
        for ((l, x), y) in lhs.coefficients().iter().zip(fu.coefficients()).zip(fv.coefficients()) {
            prop_assert!((l - (x * a + y * b)).norm() <= 1e-11);
        }
    }

    #[test]
    fn symbols_compose(m in modes(8)) {
        // (1+ξ²) after (1+ξ²)⁻¹ is the identity; two derivatives are D²
        let g = Grid::new(64, 2.0 * PI).unwrap();
        let u = band_limited(&g, &m);
        let there = u.apply_symbol(|x| 1.0 / (1.0 + x * x)).unwrap();
        let back = there.apply_symbol(|x| 1.0 + x * x).unwrap();
        prop_assert!(sup_diff(&u, &back) <= 1e-12);
        let twice = u.derivative(1).derivative(1);
        prop_assert!(sup_diff(&twice, &u.derivative(2)) <= 1e-11);
    }

    #[test]
    fn p_inverts_on_mean_free_fields(m in modes(10)) {
        let g = Grid::new(64, 2.0 * PI).unwrap();
        let u = band_limited(&g, &m);
        for k in [KernelSpec::exponential(), KernelSpec::higher_order(1.0, 0.5).unwrap(), KernelSpec::gaussian(0.02).unwrap()] {
            let round = apply_p_inv(&k, &apply_p(&k, &u).unwrap()).unwrap();
            prop_assert!(sup_diff(&u, &round) <= 1e-11);
            // P² = −B⁻¹ on the nonzero modes
            let pp = apply_p(&k, &apply_p(&k, &u).unwrap()).unwrap();
            let bpp = apply_b(&k, &pp).unwrap();
            prop_assert!(sup_diff(&bpp, &u.scale(-1.0)) <= 1e-10);
        }
    }

    #[test]
    fn reduction_identities(m in modes(5)) {
        // (1 − D²)B_exp = D², (1 − aD² + bD⁴)B_ho = D². A coarse grid keeps
        // D⁴ from amplifying roundoff in the empty high modes.
        let g = Grid::new(16, 2.0 * PI).unwrap();
        let w = band_limited(&g, &m);
        let d2 = w.derivative(2);

        let be = apply_b(&KernelSpec::exponential(), &w).unwrap();
        let lhs = be.combine(1.0, &be.derivative(2), -1.0).unwrap();
        prop_assert!(sup_diff(&lhs, &d2) <= 1e-12, "{}", sup_diff(&lhs, &d2));

        let (a, b) = (0.7, 0.3);
        let bh = apply_b(&KernelSpec::higher_order(a, b).unwrap(), &w).unwrap();
        let lhs = bh
            .combine(1.0, &bh.derivative(2), -a).unwrap()
            .combine(1.0, &bh.derivative(4), b).unwrap();
        prop_assert!(sup_diff(&lhs, &d2) <= 1e-12, "{}", sup_diff(&lhs, &d2));
    }
}

#[test]
fn norms_of_single_mode_on_long_period() {
    let g = Grid::new(128, 16.0 * PI).unwrap();
    let u = g.sample(|x| (x / 2.0).cos());
    assert_abs_diff_eq!(u.l2_norm(), (8.0 * PI).sqrt(), epsilon = 1e-12);
    // (1 + ¼)^{1/2}·‖u‖ for s = 1
    assert_abs_diff_eq!(u.sobolev_norm(1.0).unwrap(), (1.25 * 8.0 * PI).sqrt(), epsilon = 1e-12);
    assert_abs_diff_eq!(
        u.inner_product(&g.sample(|x| (x / 2.0).sin())).unwrap(),
        0.0,
        epsilon = 1e-12
    );
}

#[test]
fn spectra_of_real_fields_are_hermitian() {
    let g = Grid::new(64, 3.0).unwrap();
    let u = g.sample(|x| (x * x).sin() + x);
    assert!(g.forward(&u).unwrap().conjugate_asymmetry() < 1e-12);
}
