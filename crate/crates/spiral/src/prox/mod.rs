//! Exact solvers for the separable surrogate subproblem
//! `min 0.5 ||f - s||^2 + pen(f) / alpha` over the feasible set, one per
//! penalty family.

pub mod dual;
pub mod l1;
pub mod partition;

pub use dual::{default_gap_tol, dual_objective, prox_ortho_dual, DualSolver, ProxResult};
pub use l1::prox_canonical;
pub use partition::{rdp_denoise, rdp_denoise_ti, PartitionFit};
