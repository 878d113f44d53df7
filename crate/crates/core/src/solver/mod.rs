//! Time evolution of the first-order system
//!
//! ```text
//! u_i' = v_i,    v_i' = B_i f_i(u₁, u₂),    B_i w = (β_i ∗ w)_xx
//! ```
//!
//! with classical fixed-step RK4, plus two independent references: the exact
//! mode-by-mode solution of the linear problem and Picard iteration of the
//! integrated form.

mod linear;
mod picard;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use linear::linear_exact;
pub use picard::{picard_iterate, PicardResult};

use crate::error::{Error, Result};
use crate::grid::{Grid, RealField};
use crate::kernels::{p_from_evolution, KernelSpec};
use crate::nonlinearity::NonlinearitySpec;

/// Displacements and velocities at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u1: RealField,
    pub u2: RealField,
    pub v1: RealField,
    pub v2: RealField,
}

impl State {
    pub fn grid(&self) -> &Grid {
        self.u1.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite() && self.v1.is_finite() && self.v2.is_finite()
    }

    /// `‖u₁‖_∞ + ‖u₂‖_∞`, the quantity watched by the blow-up guard.
    pub fn sup_norm(&self) -> f64 {
        self.u1.sup_norm() + self.u2.sup_norm()
    }

    /// Largest `‖·‖_∞` difference over the four fields.
    pub fn distance_sup(&self, other: &State) -> Result<f64> {
        let pairs = [
            (&self.u1, &other.u1),
            (&self.u2, &other.u2),
            (&self.v1, &other.v1),
            (&self.v2, &other.v2),
        ];
        let mut worst = 0.0_f64;
        for (a, b) in pairs {
            worst = worst.max(a.combine(1.0, b, -1.0)?.sup_norm());
        }
        Ok(worst)
    }

    /// Largest displacement difference `max(‖Δu₁‖_∞, ‖Δu₂‖_∞)`.
    pub fn displacement_distance_sup(&self, other: &State) -> Result<f64> {
        Ok(self
            .u1
            .combine(1.0, &other.u1, -1.0)?
            .sup_norm()
            .max(self.u2.combine(1.0, &other.u2, -1.0)?.sup_norm()))
    }
}

/// `(φ₁, φ₂, ψ₁, ψ₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub phi1: RealField,
    pub phi2: RealField,
    pub psi1: RealField,
    pub psi2: RealField,
}

impl InitialData {
    pub fn new(phi1: RealField, phi2: RealField, psi1: RealField, psi2: RealField) -> Result<Self> {
        let g = phi1.grid();
        if phi2.grid() != g || psi1.grid() != g || psi2.grid() != g {
            return Err(Error::GridMismatch);
        }
        Ok(InitialData { phi1, phi2, psi1, psi2 })
    }

    pub fn zeros(grid: &Grid) -> Self {
        InitialData {
            phi1: grid.zeros(),
            phi2: grid.zeros(),
            psi1: grid.zeros(),
            psi2: grid.zeros(),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.phi1.grid()
    }

    pub fn state(&self) -> State {
        State {
            t: 0.0,
            u1: self.phi1.clone(),
            u2: self.phi2.clone(),
            v1: self.psi1.clone(),
            v2: self.psi2.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Cap on `‖u₁‖_∞ + ‖u₂‖_∞`.
    pub blowup_threshold: f64,
    /// Steps between recorded snapshots.
    pub stride: usize,
    /// Two-thirds-rule spectral truncation of the nonlinear term.
    pub dealias: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dt: 1e-3,
            t_end: 1.0,
            blowup_threshold: 1e6,
            stride: 100,
            dealias: false,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", format!("{} must be positive", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::param("t_end", format!("{} must be nonnegative", self.t_end)));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::param(
                "blowup_threshold",
                format!("{} must be positive", self.blowup_threshold),
            ));
        }
        if self.stride == 0 {
            return Err(Error::param("stride", "must be at least 1"));
        }
        Ok(())
    }

    /// Step sizes covering `[0, t_end]`: whole steps, plus one shorter final
    /// step when `t_end` is not a multiple of `dt`.
    fn schedule(&self) -> (usize, Option<f64>) {
        let ratio = self.t_end / self.dt;
        let whole = ratio.round();
        if (ratio - whole).abs() <= 1e-9 * ratio.max(1.0) {
            (whole as usize, None)
        } else {
            let full = ratio.floor();
            (full as usize, Some(self.t_end - full * self.dt))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    /// The guard tripped at the end of the step `[bracket.0, bracket.1]`.
    BlowupDetected {
        t_detect: f64,
        bracket: (f64, f64),
    },
    Corrupted {
        t: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupSample {
    pub t: f64,
    pub sup: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub outcome: Outcome,
    /// States every `stride` steps (and at the final time when completed).
    pub snapshots: Vec<State>,
    /// `‖u₁‖_∞ + ‖u₂‖_∞` after every step, starting at `t = 0`.
    pub sup_history: Vec<SupSample>,
    /// Last state reached; on blow-up, the state that tripped the guard.
    pub final_state: State,
    pub steps: usize,
}

/// Time derivative of a [`State`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateDerivative {
    pub u1: RealField,
    pub u2: RealField,
    pub v1: RealField,
    pub v2: RealField,
}

/// Kernels and nonlinearity bound to a grid, with the multipliers precomputed.
#[derive(Debug, Clone)]
pub struct WaveSystem {
    grid: Grid,
    kernels: [KernelSpec; 2],
    nonlinearity: NonlinearitySpec,
    evolution: [Arc<[f64]>; 2],
    energy_p: [Arc<[f64]>; 2],
    dealiased: bool,
}

impl WaveSystem {
    pub fn new(grid: &Grid, k1: KernelSpec, k2: KernelSpec, nonlinearity: NonlinearitySpec) -> Result<Self> {
        k1.validate_on(grid)?;
        k2.validate_on(grid)?;
        let e1: Arc<[f64]> = k1.evolution_symbol(grid)?.into();
        let e2: Arc<[f64]> = k2.evolution_symbol(grid)?.into();
        let p1: Arc<[f64]> = p_from_evolution(grid, &e1)?.into();
        let p2: Arc<[f64]> = p_from_evolution(grid, &e2)?.into();
        Ok(WaveSystem {
            grid: grid.clone(),
            kernels: [k1, k2],
            nonlinearity,
            evolution: [e1, e2],
            energy_p: [p1, p2],
            dealiased: false,
        })
    }

    /// Copy whose evolution multipliers vanish for `|k| > n/3`. The energy
    /// operators keep the full kernels.
    pub fn dealiased(&self) -> Self {
        let n = self.grid.n();
        let mask = |sym: &Arc<[f64]>| -> Arc<[f64]> {
            sym.iter()
                .enumerate()
                .map(|(j, &b)| if 3 * j.min(n - j) > n { 0.0 } else { b })
                .collect::<Vec<_>>()
                .into()
        };
        WaveSystem {
            evolution: [mask(&self.evolution[0]), mask(&self.evolution[1])],
            dealiased: true,
            ..self.clone()
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kernel1(&self) -> &KernelSpec {
        &self.kernels[0]
    }

    pub fn kernel2(&self) -> &KernelSpec {
        &self.kernels[1]
    }

    pub fn nonlinearity(&self) -> &NonlinearitySpec {
        &self.nonlinearity
    }

    pub fn is_dealiased(&self) -> bool {
        self.dealiased
    }

    pub(crate) fn evolution_symbols(&self) -> &[Arc<[f64]>; 2] {
        &self.evolution
    }

    /// `P_i` multipliers matching the evolution operators.
    pub fn p_symbols(&self) -> &[Arc<[f64]>; 2] {
        &self.energy_p
    }

    /// `(B₁f₁(u), B₂f₂(u))` on raw sample vectors.
    pub(crate) fn acceleration(&self, u1: &[f64], u2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let nl = &self.nonlinearity;
        let (f1, f2): (Vec<f64>, Vec<f64>) = u1.iter().zip(u2).map(|(&a, &b)| (nl.f1(a, b), nl.f2(a, b))).unzip();
        (
            self.grid.multiply_values(&f1, &self.evolution[0]),
            self.grid.multiply_values(&f2, &self.evolution[1]),
        )
    }

    fn check_state(&self, s: &State) -> Result<()> {
        for f in [&s.u1, &s.u2, &s.v1, &s.v2] {
            if *f.grid() != self.grid {
                return Err(Error::GridMismatch);
            }
        }
        Ok(())
    }

    /// `(v₁, v₂, B₁f₁, B₂f₂)`.
    pub fn rhs(&self, s: &State) -> Result<StateDerivative> {
        self.check_state(s)?;
        let (a1, a2) = self.acceleration(s.u1.values(), s.u2.values());
        if a1.iter().chain(&a2).any(|v| !v.is_finite()) {
            return Err(Error::Corrupted { t: s.t });
        }
        Ok(StateDerivative {
            u1: s.v1.clone(),
            u2: s.v2.clone(),
            v1: RealField::from_parts(&self.grid, a1),
            v2: RealField::from_parts(&self.grid, a2),
        })
    }

    /// One classical RK4 step of size `dt` (negative steps integrate backwards).
    pub fn step_rk4(&self, s: &State, dt: f64) -> Result<State> {
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::param("dt", format!("{dt} must be finite and nonzero")));
        }
        self.check_state(s)?;
        let next = self.step_raw(s, dt);
        if next.is_finite() {
            Ok(next)
        } else {
            Err(Error::Corrupted { t: next.t })
        }
    }

    /// RK4 step without the finiteness check; the integrator classifies the result.
    fn step_raw(&self, s: &State, dt: f64) -> State {
        let n = self.grid.n();
        let u1 = s.u1.values();
        let u2 = s.u2.values();
        let v1 = s.v1.values();
        let v2 = s.v2.values();

        let stage = |base: &[f64], rate: &[f64], h: f64| -> Vec<f64> {
            base.iter().zip(rate).map(|(b, r)| b + h * r).collect()
        };

        // k1
        let (a1_1, a2_1) = self.acceleration(u1, u2);
        // k2: u + dt/2·v, v + dt/2·a
        let half = 0.5 * dt;
        let u1_2 = stage(u1, v1, half);
        let u2_2 = stage(u2, v2, half);
        let v1_2 = stage(v1, &a1_1, half);
        let v2_2 = stage(v2, &a2_1, half);
        let (a1_2, a2_2) = self.acceleration(&u1_2, &u2_2);
        // k3
        let u1_3 = stage(u1, &v1_2, half);
        let u2_3 = stage(u2, &v2_2, half);
        let v1_3 = stage(v1, &a1_2, half);
        let v2_3 = stage(v2, &a2_2, half);
        let (a1_3, a2_3) = self.acceleration(&u1_3, &u2_3);
        // k4
        let u1_4 = stage(u1, &v1_3, dt);
        let u2_4 = stage(u2, &v2_3, dt);
        let v1_4 = stage(v1, &a1_3, dt);
        let v2_4 = stage(v2, &a2_3, dt);
        let (a1_4, a2_4) = self.acceleration(&u1_4, &u2_4);

        let sixth = dt / 6.0;
        let combine = |base: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|j| base[j] + sixth * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
                .collect()
        };
        State {
            t: s.t + dt,
            u1: RealField::from_parts(&self.grid, combine(u1, v1, &v1_2, &v1_3, &v1_4)),
            u2: RealField::from_parts(&self.grid, combine(u2, v2, &v2_2, &v2_3, &v2_4)),
            v1: RealField::from_parts(&self.grid, combine(v1, &a1_1, &a1_2, &a1_3, &a1_4)),
            v2: RealField::from_parts(&self.grid, combine(v2, &a2_1, &a2_2, &a2_3, &a2_4)),
        }
    }

    pub fn integrate(&self, init: &InitialData, cfg: &EvolutionConfig) -> Result<SimulationResult> {
        self.integrate_observed(init, cfg, &mut |_| {})
    }

    /// Runs to `t_end` or until the guard trips. `observer` sees every snapshot.
    pub fn integrate_observed(
        &self,
        init: &InitialData,
        cfg: &EvolutionConfig,
        observer: &mut dyn FnMut(&State),
    ) -> Result<SimulationResult> {
        cfg.validate()?;
        if *init.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let system = if cfg.dealias && !self.dealiased {
            self.dealiased()
        } else {
            self.clone()
        };

        let mut state = init.state();
        let mut snapshots = Vec::new();
        let mut sup_history = Vec::new();

        let sup0 = state.sup_norm();
        sup_history.push(SupSample { t: 0.0, sup: sup0 });
        if !state.is_finite() {
            return Ok(SimulationResult {
                outcome: Outcome::Corrupted { t: 0.0 },
                snapshots,
                sup_history,
                final_state: state,
                steps: 0,
            });
        }
        if sup0 > cfg.blowup_threshold {
            return Ok(SimulationResult {
                outcome: Outcome::BlowupDetected {
                    t_detect: 0.0,
                    bracket: (0.0, 0.0),
                },
                snapshots,
                sup_history,
                final_state: state,
                steps: 0,
            });
        }
        observer(&state);
        snapshots.push(state.clone());

        let (whole, partial) = cfg.schedule();
        let total = whole + usize::from(partial.is_some());
        for step in 1..=total {
            let h = if step <= whole {
                cfg.dt
            } else {
                partial.unwrap_or(cfg.dt)
            };
            let t_prev = state.t;
            let mut next = system.step_raw(&state, h);
            // pin the clock to the grid of steps so long runs do not drift
            next.t = if step <= whole { step as f64 * cfg.dt } else { cfg.t_end };
            let sup = next.sup_norm();
            sup_history.push(SupSample { t: next.t, sup });

            if !next.is_finite() {
                let t = next.t;
                return Ok(SimulationResult {
                    outcome: Outcome::Corrupted { t },
                    snapshots,
                    sup_history,
                    final_state: next,
                    steps: step,
                });
            }
            if sup > cfg.blowup_threshold {
                let t = next.t;
                return Ok(SimulationResult {
                    outcome: Outcome::BlowupDetected {
                        t_detect: t,
                        bracket: (t_prev, t),
                    },
                    snapshots,
                    sup_history,
                    final_state: next,
                    steps: step,
                });
            }
            state = next;
            if step % cfg.stride == 0 || step == total {
                observer(&state);
                snapshots.push(state.clone());
            }
        }
        Ok(SimulationResult {
            outcome: Outcome::Completed,
            snapshots,
            sup_history,
            final_state: state,
            steps: total,
        })
    }
}
