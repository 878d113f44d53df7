use super::{InitialData, State};
use crate::error::Result;
use crate::grid::{Grid, RealField};
use crate::kernels::KernelSpec;

/// Exact solution of the linear problem (`g ≡ 0`) at time `t`.
///
/// Each mode solves `û_tt = −ω²û` with `ω(ξ)² = ξ²β̂(ξ)`, so
/// `û(t) = φ̂ cos ωt + ψ̂ sin(ωt)/ω`; the zero mode moves as `φ̂ + tψ̂`.
pub fn linear_exact(init: &InitialData, k1: &KernelSpec, k2: &KernelSpec, t: f64) -> Result<State> {
    let grid = init.grid();
    let (u1, v1) = evolve_component(grid, &k1.evolution_symbol(grid)?, &init.phi1, &init.psi1, t);
    let (u2, v2) = evolve_component(grid, &k2.evolution_symbol(grid)?, &init.phi2, &init.psi2, t);
    Ok(State { t, u1, u2, v1, v2 })
}

fn evolve_component(
    grid: &Grid,
    evolution: &[f64],
    phi: &RealField,
    psi: &RealField,
    t: f64,
) -> (RealField, RealField) {
    let phi_hat = grid.forward_values(phi.values());
    let psi_hat = grid.forward_values(psi.values());
    let mut u_hat = Vec::with_capacity(phi_hat.len());
    let mut v_hat = Vec::with_capacity(phi_hat.len());
    for ((&p, &q), &b) in phi_hat.iter().zip(&psi_hat).zip(evolution) {
        let omega = (-b).max(0.0).sqrt();
        let (c, s) = ((omega * t).cos(), (omega * t).sin());
        // sin(ωt)/ω → t as ω → 0
        let sinc = if omega * t.abs() > 1e-8 { s / omega } else { t };
        u_hat.push(p * c + q * sinc);
        v_hat.push(-p * omega * s + q * c);
    }
    (
        RealField::from_parts(grid, grid.inverse_values(u_hat)),
        RealField::from_parts(grid, grid.inverse_values(v_hat)),
    )
}
