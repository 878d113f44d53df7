use super::{InitialData, State, WaveSystem};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::RealField;

/// Iterations in a row with growing distance that count as divergence.
const DIVERGENCE_RUN: usize = 3;

#[derive(Debug, Clone)]
pub struct PicardResult {
    /// Final iterate at the horizon; velocities from the companion integral.
    pub state: State,
    /// `‖u^{(m+1)} − u^{(m)}‖₁` summed over both components, maximised over time nodes.
    pub history: Vec<f64>,
}

/// Picard iteration of the integrated system
///
/// ```text
/// u_i(t)  = φ_i + tψ_i + ∫₀ᵗ (t−τ) B_i f_i(u(τ)) dτ
/// u_it(t) = ψ_i + ∫₀ᵗ B_i f_i(u(τ)) dτ
/// ```
///
/// on `n_time_nodes` equispaced slices of `[0, horizon]`, with composite
/// trapezoid quadrature in `τ`. The slices of one sweep are independent and
/// are evaluated under `exec`.
pub fn picard_iterate(
    init: &InitialData,
    horizon: f64,
    n_time_nodes: usize,
    n_iters: usize,
    system: &WaveSystem,
    exec: Execution,
) -> Result<PicardResult> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::param("horizon", format!("{horizon} must be nonnegative")));
    }
    if n_time_nodes < 2 {
        return Err(Error::param("n_time_nodes", "need at least two time nodes"));
    }
    if n_iters == 0 {
        return Err(Error::param("n_iters", "need at least one iteration"));
    }
    let grid = system.grid();
    if init.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let n = grid.n();
    let dtau = horizon / (n_time_nodes - 1) as f64;
    let taus: Vec<f64> = (0..n_time_nodes).map(|k| k as f64 * dtau).collect();
    let phi = [init.phi1.values(), init.phi2.values()];
    let psi = [init.psi1.values(), init.psi2.values()];

    let free = |tau: f64, c: usize| -> Vec<f64> { (0..n).map(|j| phi[c][j] + tau * psi[c][j]).collect() };
    let mut iterate: Vec<[Vec<f64>; 2]> = taus.iter().map(|&t| [free(t, 0), free(t, 1)]).collect();
    let mut history = Vec::with_capacity(n_iters);
    let mut velocity = [psi[0].to_vec(), psi[1].to_vec()];
    let mut growing = 0;

    for _ in 0..n_iters {
        let accel: Vec<(Vec<f64>, Vec<f64>)> =
            exec.map_slice(&iterate, |slice| system.acceleration(&slice[0], &slice[1]));
        if accel.iter().any(|(a, b)| a.iter().chain(b).any(|v| !v.is_finite())) {
            return Err(Error::Corrupted { t: horizon });
        }

        let mut next: Vec<[Vec<f64>; 2]> = Vec::with_capacity(n_time_nodes);
        // running ∫₀^τ h and ∫₀^τ τ′h for each component
        let mut i0 = [vec![0.0; n], vec![0.0; n]];
        let mut i1 = [vec![0.0; n], vec![0.0; n]];
        for (k, &tau) in taus.iter().enumerate() {
            if k > 0 {
                let t_prev = taus[k - 1];
                for c in 0..2 {
                    let (h_prev, h_now) = match c {
                        0 => (&accel[k - 1].0, &accel[k].0),
                        _ => (&accel[k - 1].1, &accel[k].1),
                    };
                    for j in 0..n {
                        i0[c][j] += 0.5 * dtau * (h_prev[j] + h_now[j]);
                        i1[c][j] += 0.5 * dtau * (t_prev * h_prev[j] + tau * h_now[j]);
                    }
                }
            }
            next.push([0, 1].map(|c| {
                (0..n)
                    .map(|j| phi[c][j] + tau * psi[c][j] + tau * i0[c][j] - i1[c][j])
                    .collect()
            }));
        }
        velocity = [0, 1].map(|c| (0..n).map(|j| psi[c][j] + i0[c][j]).collect());

        let distances: Vec<f64> = exec.map_indexed(n_time_nodes, |k| {
            (0..2)
                .map(|c| {
                    let diff: Vec<f64> = next[k][c].iter().zip(&iterate[k][c]).map(|(a, b)| a - b).collect();
                    RealField::from_parts(grid, diff)
                        .sobolev_norm(1.0)
                        .unwrap_or(f64::INFINITY)
                })
                .sum()
        });
        let distance = distances.into_iter().fold(0.0_f64, f64::max);
        if let Some(&last) = history.last() {
            growing = if distance > last { growing + 1 } else { 0 };
        }
        history.push(distance);
        iterate = next;
        if growing >= DIVERGENCE_RUN {
            return Err(Error::PicardDiverged { history });
        }
    }

    let [u1, u2] = iterate.pop().expect("at least two time nodes");
    let [v1, v2] = velocity;
    Ok(PicardResult {
        state: State {
            t: horizon,
            u1: RealField::from_parts(grid, u1),
            u2: RealField::from_parts(grid, u2),
            v1: RealField::from_parts(grid, v1),
            v2: RealField::from_parts(grid, v2),
        },
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::kernels::KernelSpec;
    use crate::nonlinearity::NonlinearitySpec;
    use crate::solver::linear_exact;
    use std::f64::consts::PI;

    #[test]
    fn zero_data_converges_in_one_sweep() {
        let grid = Grid::new(16, 2.0 * PI).unwrap();
        let sys = WaveSystem::new(
            &grid,
            KernelSpec::exponential(),
            KernelSpec::exponential(),
            NonlinearitySpec::quartic(1.0, 1.0),
        )
        .unwrap();
        let res = picard_iterate(&InitialData::zeros(&grid), 0.1, 11, 1, &sys, Execution::Sequential).unwrap();
        assert_eq!(res.state.sup_norm(), 0.0);
        assert_eq!(res.history, vec![0.0]);
    }

    #[test]
    fn linear_problem_matches_exact_modes() {
        let grid = Grid::new(32, 2.0 * PI).unwrap();
        let k = KernelSpec::exponential();
        let sys = WaveSystem::new(&grid, k.clone(), k.clone(), NonlinearitySpec::linear()).unwrap();
        let data = InitialData::new(grid.sample(f64::cos), grid.zeros(), grid.zeros(), grid.zeros()).unwrap();
        let res = picard_iterate(&data, 0.1, 101, 12, &sys, Execution::default()).unwrap();
        let exact = linear_exact(&data, &k, &k, 0.1).unwrap();
        // trapezoid error ~ T·Δτ²·ω⁴/12 ≈ 2e-9
        assert!(res.state.distance_sup(&exact).unwrap() < 1e-8);
        assert!(res.history.last().unwrap() < &1e-12, "{:?}", res.history);
    }

    #[test]
    fn divergence_is_reported() {
        // a long horizon with a strongly growing nonlinearity does not contract
        let grid = Grid::new(16, 2.0 * PI).unwrap();
        let sys = WaveSystem::new(
            &grid,
            KernelSpec::exponential(),
            KernelSpec::exponential(),
            NonlinearitySpec::quartic(-20.0, 0.0),
        )
        .unwrap();
        let data = InitialData::new(grid.sample(|x| 2.0 * x.cos()), grid.zeros(), grid.zeros(), grid.zeros()).unwrap();
        let err = picard_iterate(&data, 5.0, 51, 30, &sys, Execution::Sequential).unwrap_err();
        assert!(matches!(err, Error::PicardDiverged { .. }));
    }

    #[test]
    fn argument_validation() {
        let grid = Grid::new(16, 2.0 * PI).unwrap();
        let sys = WaveSystem::new(
            &grid,
            KernelSpec::exponential(),
            KernelSpec::exponential(),
            NonlinearitySpec::linear(),
        )
        .unwrap();
        let data = InitialData::zeros(&grid);
        assert!(picard_iterate(&data, 0.1, 1, 3, &sys, Execution::Sequential).is_err());
        assert!(picard_iterate(&data, 0.1, 5, 0, &sys, Execution::Sequential).is_err());
        assert!(picard_iterate(&data, -0.1, 5, 3, &sys, Execution::Sequential).is_err());
    }
}
