//! EM baseline: the classical multiplicative update for Poisson linear
//! models, optionally composed with the partition denoiser as an M-step
//! (EM-MPLE). Pure EM (`tau = 0`) never increases the negative
//! log-likelihood; the penalized variant trades likelihood for the same
//! partition cost the SPIRAL partition penalty uses, so the two methods
//! optimize comparable objectives and differ in the step mechanism.

use crate::driver::{penalty_value, Penalty, SolveTrace, TraceRow};
use crate::error::{invalid_param, Error, Result};
use crate::model::{em_init, poisson_nll, CountVector, ObjectiveValue, Signal};
use crate::prox::{rdp_denoise, rdp_denoise_ti};
use crate::sensing::SensingMatrix;
use std::time::{Duration, Instant};

/// One multiplicative E-step: `f <- f .* A^T(y ./ Af) ./ A^T 1`, with
/// `0/0 := 0`. Fixed points are exactly the points where `y = Af` on the
/// support of `f`.
pub fn em_e_step(f: &Signal, a: &SensingMatrix, y: &CountVector) -> Result<Signal> {
    if f.len() != a.n_cols() {
        return Err(Error::DimensionMismatch {
            what: "signal length vs. matrix columns",
            expected: a.n_cols(),
            got: f.len(),
        });
    }
    if y.len() != a.n_rows() {
        return Err(Error::DimensionMismatch {
            what: "count length vs. matrix rows",
            expected: a.n_rows(),
            got: y.len(),
        });
    }
    let col_sums = a.column_sums();
    if let Some(col) = col_sums.iter().position(|&c| c == 0.0) {
        return Err(Error::ZeroColumn { col });
    }
    let af = a.mat_vec(f.values());
    let mut ratio = Vec::with_capacity(af.len());
    for (i, (&mu, &yi)) in af.iter().zip(y.counts().iter()).enumerate() {
        if mu == 0.0 {
            if yi > 0 {
                return Err(Error::ZeroIntensityAtPositiveCount { index: i });
            }
            ratio.push(0.0);
        } else {
            ratio.push(yi as f64 / mu);
        }
    }
    let back = a.mat_tvec(&ratio);
    Signal::nonneg(
        f.values()
            .iter()
            .zip(back.iter())
            .zip(col_sums.iter())
            .map(|((&fj, &bj), &cj)| fj * bj / cj)
            .collect(),
    )
}

#[derive(Debug, Clone)]
pub struct EmConfig {
    pub tau: f64,
    /// Use the cycle-spun partition denoiser in the M-step.
    pub translation_invariant: bool,
    pub max_iters: usize,
    pub time_budget: Option<Duration>,
    pub rel_change_tol: f64,
}

impl EmConfig {
    pub fn new(tau: f64, translation_invariant: bool) -> Self {
        EmConfig {
            tau,
            translation_invariant,
            max_iters: 1_000_000,
            time_budget: None,
            rel_change_tol: 1e-8,
        }
    }

    fn validate(&self, m: usize) -> Result<()> {
        if !self.tau.is_finite() || self.tau < 0.0 {
            return Err(invalid_param(
                "tau",
                format!("need finite tau >= 0, got {}", self.tau),
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
        if self.tau > 0.0 && !m.is_power_of_two() {
            return Err(invalid_param(
                "tau",
                format!("partition M-step needs power-of-two length, got {m}"),
            ));
        }
        Ok(())
    }

    fn penalty(&self) -> Penalty {
        if self.translation_invariant {
            Penalty::PartitionTi
        } else {
            Penalty::Partition
        }
    }
}

fn em_objective(
    f: &Signal,
    a: &SensingMatrix,
    y: &CountVector,
    cfg: &EmConfig,
) -> Result<ObjectiveValue> {
    let nll = poisson_nll(f, a, y)?;
    let pen = if cfg.tau == 0.0 {
        0.0
    } else {
        penalty_value(&cfg.penalty(), cfg.tau, f)?
    };
    Ok(ObjectiveValue::new(nll, pen))
}

fn strictly_after(start: Instant, prev: f64) -> f64 {
    let mut t = start.elapsed().as_secs_f64();
    while t <= prev {
        t = start.elapsed().as_secs_f64();
    }
    t
}

/// EM-MPLE: from the EM starting point, alternate the E-step with the
/// partition M-step (`tau = 0` skips the M-step: pure EM). The trace uses
/// the same schema as the SPIRAL driver; `alpha` is not meaningful for EM
/// and is recorded as 1.
pub fn run_em_mple(
    a: &SensingMatrix,
    y: &CountVector,
    cfg: &EmConfig,
    truth: Option<&Signal>,
) -> Result<SolveTrace> {
    cfg.validate(a.n_cols())?;
    let start = Instant::now();
    let mut f = em_init(a, y)?;
    let mut rows = Vec::new();
    let mut prev_seconds = -1.0;
    let mut record = |k: usize, f: &Signal, prev_seconds: &mut f64| -> Result<()> {
        let seconds = strictly_after(start, *prev_seconds);
        *prev_seconds = seconds;
        let rms = truth.map(|t| f.rms_error(t)).transpose()?;
        rows.push(TraceRow {
            iter: k,
            objective: em_objective(f, a, y, cfg)?.total,
            alpha: 1.0,
            rms,
            seconds,
        });
        Ok(())
    };
    record(0, &f, &mut prev_seconds)?;

    for k in 1..=cfg.max_iters {
        if let Some(budget) = cfg.time_budget {
            if start.elapsed() >= budget {
                break;
            }
        }
        let e = em_e_step(&f, a, y)?;
        let next = if cfg.tau == 0.0 {
            e
        } else if cfg.translation_invariant {
            rdp_denoise_ti(&e, cfg.tau)?
        } else {
            rdp_denoise(&e, cfg.tau)?.fitted_signal()
        };
        record(k, &next, &mut prev_seconds)?;
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
        stalled: false,
    })
}
