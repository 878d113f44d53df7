//! Pseudospectral simulation of the nonlocal nonlinear coupled wave system
//!
//! ```text
//! u_i,tt = (β_i ∗ (u_i + g_i(u_1, u_2)))_xx,   i = 1, 2
//! ```
//!
//! on a periodic grid. Kernels are described by their Fourier symbols, so every
//! convolution is an exact multiplier in frequency space. Besides the time
//! integrator the crate carries the quantities needed to check the qualitative
//! theory numerically: the conserved energy, the concavity functional used for
//! blow-up certificates, and sampled checks of the structural hypotheses on the
//! nonlinearity.

// `!(x > 0.0)` rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod grid;
pub mod kernels;
pub mod nonlinearity;
pub mod solver;

pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::{Grid, RealField, SpectralField};
pub use kernels::{KernelFamily, KernelSpec, SingularKernelDescriptor};
pub use nonlinearity::{NonlinearityFamily, NonlinearitySpec};
pub use solver::{EvolutionConfig, InitialData, Outcome, SimulationResult, State, WaveSystem};
