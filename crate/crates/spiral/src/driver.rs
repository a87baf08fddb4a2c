//! SPIRAL outer loop.
//!
//! Each iteration takes a gradient step scaled by a Barzilai-Borwein
//! curvature estimate `alpha_k` and solves the separable surrogate
//!
//! ```text
//! f^{k+1} = argmin_{f} 0.5 ||f - s^k||^2 + pen(f) / alpha_k,
//! s^k     = f^k - grad F(f^k) / alpha_k
//! ```
//!
//! exactly, dispatching on the penalty: componentwise soft threshold,
//! orthonormal-basis l1 via the dual solver, or the partition penalty via
//! dynamic programming (optionally cycle-spun). The default mode accepts
//! every surrogate minimizer even when the true objective rises
//! (non-monotone spikes settle out and forcing descent tends to slow
//! convergence); monotone mode doubles `alpha_k` until the objective stops
//! increasing. A candidate with infinite objective (possible when a large
//! weight zeroes the estimate) is never accepted in either mode: the step
//! shrinks as in monotone mode, and if `alpha_max` cannot fix it the solver
//! keeps the current iterate and reports a stall.

use crate::error::{invalid_param, Result};
use crate::model::{
    em_init, poisson_nll, poisson_nll_gradient, CountVector, ObjectiveValue, Signal,
};
use crate::prox::{default_gap_tol, prox_canonical, prox_ortho_dual, rdp_denoise, rdp_denoise_ti};
use crate::sensing::SensingMatrix;
use crate::transforms::OrthoBasis;
use std::time::{Duration, Instant};

/// Penalty family; decides the subproblem solver and the reported
/// penalty value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Penalty {
    /// `tau ||f||_1` in the canonical basis.
    CanonicalL1,
    /// `tau ||W^T f||_1` with synthesis nonnegativity, solved via the dual.
    OrthoL1(OrthoBasis),
    /// `tau |P|` over recursive dyadic partitions.
    Partition,
    /// Partition penalty with the cycle-spun (translation-invariant) solver.
    PartitionTi,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub penalty: Penalty,
    pub tau: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha0: f64,
    pub max_iters: usize,
    pub time_budget: Option<Duration>,
    pub rel_change_tol: f64,
    /// Dual-solver sweep cap per prox call.
    pub inner_sweep_cap: usize,
    /// Dual-solver gap tolerance; `None` scales 1e-8 by `1 + ||s||^2`.
    pub inner_gap_tol: Option<f64>,
    pub monotone: bool,
    /// Experimental two-phase mode: run non-monotone, then enforce descent
    /// from this iteration on.
    pub monotone_after: Option<usize>,
}

impl SolverConfig {
    pub fn new(penalty: Penalty, tau: f64) -> Self {
        SolverConfig {
            penalty,
            tau,
            alpha_min: 1e-8,
            alpha_max: 1e8,
            alpha0: 1.0,
            max_iters: 1_000_000,
            time_budget: None,
            rel_change_tol: 1e-8,
            inner_sweep_cap: 100,
            inner_gap_tol: None,
            monotone: false,
            monotone_after: None,
        }
    }

    fn validate(&self, m: usize) -> Result<()> {
        if !self.tau.is_finite() || self.tau < 0.0 {
            return Err(invalid_param(
                "tau",
                format!("need finite tau >= 0, got {}", self.tau),
            ));
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= self.alpha_max)
            || !self.alpha_max.is_finite()
        {
            return Err(invalid_param(
                "alpha bounds",
                format!(
                    "need 0 < alpha_min <= alpha_max, got [{}, {}]",
                    self.alpha_min, self.alpha_max
                ),
            ));
        }
        if !self.alpha0.is_finite() || self.alpha0 <= 0.0 {
            return Err(invalid_param(
                "alpha0",
                format!("need finite alpha0 > 0, got {}", self.alpha0),
            ));
        }
        if self.max_iters == 0 {
            return Err(invalid_param("max_iters", "need at least one iteration"));
        }
        if !self.rel_change_tol.is_finite() || self.rel_change_tol < 0.0 {
            return Err(invalid_param(
                "rel_change_tol",
                format!("need finite tolerance >= 0, got {}", self.rel_change_tol),
            ));
        }
        if self.inner_sweep_cap == 0 {
            return Err(invalid_param("inner_sweep_cap", "need at least one sweep"));
        }
        if let Some(tol) = self.inner_gap_tol {
            if !tol.is_finite() || tol <= 0.0 {
                return Err(invalid_param(
                    "inner_gap_tol",
                    format!("need finite gap tolerance > 0, got {tol}"),
                ));
            }
        }
        match self.penalty {
            Penalty::OrthoL1(basis) => {
                if basis.len() != m {
                    return Err(invalid_param(
                        "penalty basis",
                        format!("basis length {} but signal length {m}", basis.len()),
                    ));
                }
            }
            Penalty::Partition | Penalty::PartitionTi => {
                if !m.is_power_of_two() {
                    return Err(invalid_param(
                        "penalty",
                        format!("partition penalty needs power-of-two length, got {m}"),
                    ));
                }
            }
            Penalty::CanonicalL1 => {}
        }
        Ok(())
    }
}

/// One recorded outer iteration. `rms` is the relative l2 error against the
/// true signal when one was supplied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub alpha: f64,
    pub rms: Option<f64>,
    pub seconds: f64,
}

/// Iteration history plus the final estimate. Timestamps increase strictly;
/// row 0 is the starting point.
#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub rows: Vec<TraceRow>,
    pub estimate: Signal,
    pub stalled: bool,
}

impl SolveTrace {
    pub fn final_objective(&self) -> f64 {
        self.rows.last().map(|r| r.objective).unwrap_or(f64::NAN)
    }

    pub fn final_rms(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.rms)
    }
}

/// Barzilai-Borwein curvature along the last step, clipped to
/// `[alpha_min, alpha_max]`. A non-positive or non-finite raw ratio returns
/// `alpha_max`; a zero step returns `None` (caller keeps its previous alpha).
pub fn bb_step(df: &[f64], dg: &[f64], alpha_min: f64, alpha_max: f64) -> Option<f64> {
    let dot_fg: f64 = df.iter().zip(dg).map(|(a, b)| a * b).sum();
    let dot_ff: f64 = df.iter().map(|a| a * a).sum();
    if dot_ff == 0.0 {
        return None;
    }
    let ratio = dot_fg / dot_ff;
    if !ratio.is_finite() || ratio <= 0.0 {
        Some(alpha_max)
    } else {
        Some(ratio.clamp(alpha_min, alpha_max))
    }
}

/// Penalty value `pen(f)` as reported in objectives and traces. For the
/// partition penalties this charges `tau` per interval of the coarsest
/// dyadic partition on which `f` is exactly constant (for a partition-prox
/// output that is exactly the partition the solver chose).
pub fn penalty_value(penalty: &Penalty, tau: f64, f: &Signal) -> Result<f64> {
    match penalty {
        Penalty::CanonicalL1 => Ok(tau * f.values().iter().map(|v| v.abs()).sum::<f64>()),
        Penalty::OrthoL1(basis) => {
            let theta = basis.analyze(f.values())?;
            Ok(tau * theta.iter().map(|v| v.abs()).sum::<f64>())
        }
        Penalty::Partition | Penalty::PartitionTi => {
            Ok(tau * minimal_rdp_count(f.values()) as f64)
        }
    }
}

/// Leaves of the coarsest recursive dyadic partition on which `v` is
/// piecewise constant (exact equality).
fn minimal_rdp_count(v: &[f64]) -> usize {
    if v.windows(2).all(|w| w[0] == w[1]) {
        1
    } else {
        let half = v.len() / 2;
        minimal_rdp_count(&v[..half]) + minimal_rdp_count(&v[half..])
    }
}

/// Total objective `F(f) + pen(f)` under a config's penalty.
pub fn total_objective(
    f: &Signal,
    a: &SensingMatrix,
    y: &CountVector,
    cfg: &SolverConfig,
) -> Result<ObjectiveValue> {
    let nll = poisson_nll(f, a, y)?;
    let pen = penalty_value(&cfg.penalty, cfg.tau, f)?;
    Ok(ObjectiveValue::new(nll, pen))
}

/// Mutable cross-iteration state: the last used alpha, the previous point
/// and gradient for the BB ratio, and the objective at the current iterate.
#[derive(Debug, Clone)]
pub struct StepState {
    alpha: f64,
    prev_f: Option<Vec<f64>>,
    prev_g: Option<Vec<f64>>,
    objective: ObjectiveValue,
    iter: usize,
    stalled: bool,
}

impl StepState {
    pub fn new(
        f0: &Signal,
        a: &SensingMatrix,
        y: &CountVector,
        cfg: &SolverConfig,
    ) -> Result<Self> {
        cfg.validate(f0.len())?;
        Ok(StepState {
            alpha: cfg.alpha0.clamp(cfg.alpha_min, cfg.alpha_max),
            prev_f: None,
            prev_g: None,
            objective: total_objective(f0, a, y, cfg)?,
            iter: 0,
            stalled: false,
        })
    }

    /// Alpha used by the most recent step (or the starting alpha).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn objective(&self) -> ObjectiveValue {
        self.objective
    }

    /// Completed outer iterations.
    pub fn iter(&self) -> usize {
        self.iter
    }

    /// Set when a descent-enforcing retry ran out of alpha range; the
    /// iterate did not move.
    pub fn stalled(&self) -> bool {
        self.stalled
    }
}

fn apply_prox(penalty: &Penalty, s: Vec<f64>, w: f64, cfg: &SolverConfig) -> Result<Signal> {
    let s = Signal::unconstrained(s)?;
    match penalty {
        Penalty::CanonicalL1 => prox_canonical(&s, w),
        Penalty::OrthoL1(basis) => {
            let s_theta = Signal::unconstrained(basis.analyze(s.values())?)?;
            let gap_tol = cfg
                .inner_gap_tol
                .unwrap_or_else(|| default_gap_tol(s_theta.values()));
            Ok(prox_ortho_dual(&s_theta, w, *basis, cfg.inner_sweep_cap, gap_tol)?.f)
        }
        Penalty::Partition => Ok(rdp_denoise(&s, w)?.fitted_signal()),
        Penalty::PartitionTi => rdp_denoise_ti(&s, w),
    }
}

/// One outer step from `f_k`: BB alpha, gradient step, prox. Returns the
/// accepted iterate and updates `state`; on a stall returns a copy of `f_k`
/// with `state.stalled()` set.
pub fn spiral_iterate(
    f_k: &Signal,
    state: &mut StepState,
    a: &SensingMatrix,
    y: &CountVector,
    cfg: &SolverConfig,
) -> Result<Signal> {
    let g_k = poisson_nll_gradient(f_k, a, y)?;
    let mut alpha = match (&state.prev_f, &state.prev_g) {
        (Some(pf), Some(pg)) => {
            let df: Vec<f64> = f_k.values().iter().zip(pf).map(|(a, b)| a - b).collect();
            let dg: Vec<f64> = g_k.values().iter().zip(pg).map(|(a, b)| a - b).collect();
            bb_step(&df, &dg, cfg.alpha_min, cfg.alpha_max).unwrap_or(state.alpha)
        }
        _ => state.alpha,
    };
    let enforce_descent =
        cfg.monotone || cfg.monotone_after.map_or(false, |k0| state.iter >= k0);
    let w = cfg.tau; // weight passed to the prox is tau / alpha, formed below

    loop {
        let s: Vec<f64> = f_k
            .values()
            .iter()
            .zip(g_k.values())
            .map(|(f, g)| f - g / alpha)
            .collect();
        let candidate = apply_prox(&cfg.penalty, s, w / alpha, cfg)?;
        let obj = total_objective(&candidate, a, y, cfg)?;
        let acceptable = if enforce_descent {
            obj.total <= state.objective.total
        } else {
            obj.is_finite()
        };
        if acceptable {
            state.prev_f = Some(f_k.values().to_vec());
            state.prev_g = Some(g_k.values().to_vec());
            state.alpha = alpha;
            state.objective = obj;
            state.iter += 1;
            state.stalled = false;
            return Ok(candidate);
        }
        if alpha >= cfg.alpha_max {
            state.alpha = alpha;
            state.iter += 1;
            state.stalled = true;
            return Ok(f_k.clone());
        }
        alpha = (2.0 * alpha).min(cfg.alpha_max);
    }
}

/// Next wall-clock reading strictly after `prev` (spins at most a clock tick).
fn strictly_after(start: Instant, prev: f64) -> f64 {
    let mut t = start.elapsed().as_secs_f64();
    while t <= prev {
        t = start.elapsed().as_secs_f64();
    }
    t
}

/// Full solve from the EM starting point: iterate until `max_iters`, the
/// time budget (checked between iterations), stall, or relative change
/// `||f_{k+1} - f_k|| / max(||f_k||, 1) <= rel_change_tol`.
pub fn run(
    a: &SensingMatrix,
    y: &CountVector,
    cfg: &SolverConfig,
    truth: Option<&Signal>,
) -> Result<SolveTrace> {
    run_with_observer(a, y, cfg, truth, |_, _| {})
}

/// [`run`] with a callback invoked on every iterate (including the start),
/// before its trace row is recorded.
pub fn run_with_observer(
    a: &SensingMatrix,
    y: &CountVector,
    cfg: &SolverConfig,
    truth: Option<&Signal>,
    mut observer: impl FnMut(usize, &Signal),
) -> Result<SolveTrace> {
    let start = Instant::now();
    let mut f = em_init(a, y)?;
    // boundary guard: if the EM start somehow leaves a positive-count bin at
    // zero intensity, nudge once so the first gradient exists
    if !poisson_nll(&f, a, y)?.is_finite() {
        f = Signal::nonneg(f.values().iter().map(|v| v + 1e-12).collect())?;
        if !poisson_nll(&f, a, y)?.is_finite() {
            return Err(invalid_param(
                "initialization",
                "EM starting point has infinite objective",
            ));
        }
    }
    let mut state = StepState::new(&f, a, y, cfg)?;

    let mut rows = Vec::new();
    let mut prev_seconds = -1.0;
    let mut record =
        |k: usize, obj: f64, alpha: f64, f: &Signal, prev_seconds: &mut f64| -> Result<()> {
            let seconds = strictly_after(start, *prev_seconds);
            *prev_seconds = seconds;
            let rms = truth.map(|t| f.rms_error(t)).transpose()?;
            rows.push(TraceRow {
                iter: k,
                objective: obj,
                alpha,
                rms,
                seconds,
            });
            Ok(())
        };

    observer(0, &f);
    record(0, state.objective().total, state.alpha(), &f, &mut prev_seconds)?;

    let mut stalled = false;
    for k in 1..=cfg.max_iters {
        if let Some(budget) = cfg.time_budget {
            if start.elapsed() >= budget {
                break;
            }
        }
        let next = spiral_iterate(&f, &mut state, a, y, cfg)?;
        observer(k, &next);
        record(
            k,
            state.objective().total,
            state.alpha(),
            &next,
            &mut prev_seconds,
        )?;
        if state.stalled() {
            stalled = true;
            f = next;
            break;
        }
        let diff: f64 = next
            .values()
            .iter()
            .zip(f.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let rel = diff.sqrt() / f.norm().max(1.0);
        f = next;
        if rel <= cfg.rel_change_tol {
            break;
        }
    }

    Ok(SolveTrace {
        rows,
        estimate: f,
        stalled,
    })
}
