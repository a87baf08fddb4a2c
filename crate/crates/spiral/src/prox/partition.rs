//! Partition-penalty subproblem: fit a piecewise-constant signal on a
//! recursive dyadic partition (RDP), paying tau per interval:
//!
//! ```text
//! P_hat = argmin_P 0.5 ||f(P) - s||^2 + tau |P|
//! ```
//!
//! Intervals come from recursively halving [0, m) down to single samples, so
//! there are 2m - 1 candidate intervals and the optimum is found by one
//! bottom-up dynamic-programming pass: each node compares the cost of fitting
//! itself with one constant against the sum of its children's best costs.
//! The per-interval fit under the nonnegativity constraint is
//! max(mean(s), 0). Equal merge and split costs prefer the merge, so the
//! reported partition is deterministic and as coarse as the optimum allows.
//!
//! Interval sums accumulate bottom-up through the node tree (pairwise
//! summation), which keeps the DP costs accurate enough that constant
//! intervals cost exactly tau.

use crate::error::{invalid_param, Error, Result};
use crate::model::Signal;

/// An optimal RDP fit: intervals in left-to-right order, one constant level
/// per interval, and the achieved cost `0.5 ||f(P) - s||^2 + tau |P|`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionFit {
    m: usize,
    intervals: Vec<(usize, usize)>,
    levels: Vec<f64>,
    cost: f64,
}

impl PartitionFit {
    /// Length of the underlying signal.
    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// `(start, length)` pairs, sorted by start, lengths powers of two.
    pub fn intervals(&self) -> &[(usize, usize)] {
        &self.intervals
    }

    /// Constant fit per interval, aligned with [`intervals`](Self::intervals).
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn n_intervals(&self) -> usize {
        self.intervals.len()
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// Expand the per-interval levels to a length-m piecewise-constant signal.
    pub fn fitted_signal(&self) -> Signal {
        let mut values = vec![0.0; self.m];
        for (&(start, len), &level) in self.intervals.iter().zip(&self.levels) {
            for v in &mut values[start..start + len] {
                *v = level;
            }
        }
        Signal::nonneg(values).expect("levels are clamped means, hence nonnegative")
    }
}

fn check_power_of_two(len: usize) -> Result<()> {
    if !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo { len });
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if !tau.is_finite() || tau < 0.0 {
        return Err(invalid_param(
            "tau",
            format!("need finite tau >= 0, got {tau}"),
        ));
    }
    Ok(())
}

/// DP work arrays in the heap layout, reusable across calls of equal length.
struct DpScratch {
    sum1: Vec<f64>,
    sum2: Vec<f64>,
    best: Vec<f64>,
    merged: Vec<bool>,
}

impl DpScratch {
    fn new(m: usize) -> Self {
        DpScratch {
            sum1: vec![0.0; 2 * m],
            sum2: vec![0.0; 2 * m],
            best: vec![0.0; 2 * m],
            merged: vec![false; 2 * m],
        }
    }

    /// Bottom-up DP over the interval tree: node 1 is [0, m), node k has
    /// children 2k and 2k + 1, leaves are nodes m..2m. Fills all arrays and
    /// returns the optimal cost.
    fn run(&mut self, v: &[f64], tau: f64) -> f64 {
        let m = v.len();
        for k in (1..2 * m).rev() {
            let (len, s1, s2);
            if k >= m {
                let x = v[k - m];
                len = 1;
                s1 = x;
                s2 = x * x;
            } else {
                let d = k.ilog2() as usize;
                len = m >> d;
                s1 = self.sum1[2 * k] + self.sum1[2 * k + 1];
                s2 = self.sum2[2 * k] + self.sum2[2 * k + 1];
            }
            self.sum1[k] = s1;
            self.sum2[k] = s2;
            let c = (s1 / len as f64).max(0.0);
            let sse = (s2 - 2.0 * c * s1 + len as f64 * c * c).max(0.0);
            let fit = 0.5 * sse + tau;
            if len == 1 {
                self.best[k] = fit;
                self.merged[k] = true;
            } else {
                let split = self.best[2 * k] + self.best[2 * k + 1];
                self.merged[k] = fit <= split;
                self.best[k] = if self.merged[k] { fit } else { split };
            }
        }
        self.best[1]
    }

    /// Depth-first walk of the chosen tree, left child first, calling
    /// `emit(start, len, level)` per chosen interval.
    fn walk(&self, m: usize, mut emit: impl FnMut(usize, usize, f64)) {
        let mut stack = vec![1usize];
        while let Some(k) = stack.pop() {
            if self.merged[k] {
                let d = k.ilog2() as usize;
                let len = m >> d;
                let start = (k - (1 << d)) * len;
                emit(start, len, (self.sum1[k] / len as f64).max(0.0));
            } else {
                stack.push(2 * k + 1);
                stack.push(2 * k);
            }
        }
    }
}

/// Globally optimal RDP fit of `s` with per-interval charge `tau`.
pub fn rdp_denoise(s: &Signal, tau: f64) -> Result<PartitionFit> {
    check_power_of_two(s.len())?;
    check_tau(tau)?;
    let m = s.len();
    let mut dp = DpScratch::new(m);
    let cost = dp.run(s.values(), tau);
    let mut intervals = Vec::new();
    let mut levels = Vec::new();
    dp.walk(m, |start, len, level| {
        intervals.push((start, len));
        levels.push(level);
    });
    Ok(PartitionFit {
        m,
        intervals,
        levels,
        cost,
    })
}

/// Translation-invariant variant: average the RDP fit over all `m` circular
/// shifts of the input. Shift sums pair up recursively, so averaging `m`
/// identical fits reproduces them exactly (constant inputs come back
/// unchanged for any tau).
pub fn rdp_denoise_ti(s: &Signal, tau: f64) -> Result<Signal> {
    check_power_of_two(s.len())?;
    check_tau(tau)?;
    let m = s.len();
    let mut scratch = TiScratch {
        dp: DpScratch::new(m),
        rotated: vec![0.0; m],
    };
    let total = accumulate_shifts(s.values(), tau, 0, m, &mut scratch);
    Signal::nonneg(total.into_iter().map(|v| v / m as f64).collect())
}

struct TiScratch {
    dp: DpScratch,
    rotated: Vec<f64>,
}

/// Sum of unshifted fits for shifts in [lo, hi); splits the range in half so
/// additions form a balanced tree (this keeps constant inputs exact: the
/// partial sums are power-of-two multiples).
fn accumulate_shifts(s: &[f64], tau: f64, lo: usize, hi: usize, scratch: &mut TiScratch) -> Vec<f64> {
    let m = s.len();
    if hi - lo == 1 {
        scratch.rotated[..m - lo].copy_from_slice(&s[lo..]);
        scratch.rotated[m - lo..].copy_from_slice(&s[..lo]);
        scratch.dp.run(&scratch.rotated, tau);
        // write each interval's level back at the unrotated positions
        let mut values = vec![0.0; m];
        scratch.dp.walk(m, |start, len, level| {
            for i in start..start + len {
                values[(i + lo) % m] = level;
            }
        });
        values
    } else {
        let mid = lo + (hi - lo) / 2;
        let mut left = accumulate_shifts(s, tau, lo, mid, scratch);
        let right = accumulate_shifts(s, tau, mid, hi, scratch);
        for (l, r) in left.iter_mut().zip(right) {
            *l += r;
        }
        left
    }
}
