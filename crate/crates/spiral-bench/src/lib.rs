//! Experiment harness for the `spiral` library: deterministic test
//! instances, timed (method, tau, seed) sweeps with per-run traces, CSV
//! summaries, and an SVG of error decay against compute time.

pub mod bench;
pub mod plot;
pub mod signal;

pub use bench::{
    build_instance, default_tau_grid, run_benchmark, run_method, BenchReport, ExperimentConfig,
    Instance, Method, MethodSummary, RunRecord,
};
pub use plot::emit_plot;
pub use signal::{calibrate_to_mean_count, generate_test_signal};
