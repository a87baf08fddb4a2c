//! Sparse Poisson intensity reconstruction.
//!
//! Penalized maximum-likelihood recovery of a nonnegative signal `f` from
//! counts `y ~ Poisson(Af)`: minimize the Poisson negative log-likelihood
//! plus a sparsity penalty, subject to `f >= 0`. The outer loop (SPIRAL)
//! takes Barzilai-Borwein scaled gradient steps and solves a separable
//! surrogate subproblem exactly; the penalty decides the subproblem solver:
//! componentwise soft thresholding, an orthonormal-basis l1 prox via its
//! Lagrange dual, or a recursive dyadic partition complexity penalty solved
//! by dynamic programming. A multiplicative EM baseline is included for
//! comparison.

pub mod driver;
pub mod em;
pub mod error;
pub mod io;
pub mod model;
pub mod prox;
pub mod sampling;
pub mod sensing;
pub mod transforms;

pub use driver::{
    bb_step, penalty_value, run, run_with_observer, spiral_iterate, Penalty, SolveTrace,
    SolverConfig, StepState, TraceRow,
};
pub use em::{em_e_step, run_em_mple, EmConfig};
pub use error::{Error, Result};
pub use model::{
    em_init, objective, poisson_nll, poisson_nll_gradient, CountVector, ObjectiveValue, Signal,
};
pub use prox::{
    prox_canonical, prox_ortho_dual, rdp_denoise, rdp_denoise_ti, DualSolver, PartitionFit,
    ProxResult,
};
pub use sampling::sample_counts;
pub use sensing::SensingMatrix;
pub use transforms::{BasisKind, OrthoBasis};
