//! Poisson observation model: intensity vectors, observed counts, the
//! negative log-likelihood and its gradient, and the EM-based starting point.
//!
//! The model is `y ~ Poisson(A f)` for a nonnegative intensity `f`, a
//! nonnegative sensing matrix `A`, and integer counts `y`. The data-fidelity
//! term is the negative log Poisson likelihood
//!
//! ```text
//! F(f) = sum_i [ (Af)_i - y_i * ln (Af)_i ]
//! ```
//!
//! with the conventions `0 * ln 0 = 0` and `F = +inf` whenever `(Af)_i = 0`
//! against a positive count (an infeasible intensity).

use crate::error::{Error, Result};
use crate::sensing::SensingMatrix;

/// A real intensity vector.
///
/// Feasible intensities carry `nonneg_required = true` and are verified
/// componentwise nonnegative at construction. Gradient-step points
/// (`f - g / alpha`) may be negative and carry `nonneg_required = false`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    values: Vec<f64>,
    nonneg_required: bool,
}

impl Signal {
    /// A feasible (componentwise nonnegative) intensity vector.
    pub fn nonneg(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("signal"));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i, value: v });
            }
            if v < 0.0 {
                return Err(Error::NegativeEntry { index: i, value: v });
            }
        }
        Ok(Signal {
            values,
            nonneg_required: true,
        })
    }

    /// An unconstrained vector (gradient-step points, residuals).
    pub fn unconstrained(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("signal"));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i, value: v });
            }
        }
        Ok(Signal {
            values,
            nonneg_required: false,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn nonneg_required(&self) -> bool {
        self.nonneg_required
    }

    /// Euclidean norm of the entries.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Relative root-mean-squared error `||self - truth||_2 / ||truth||_2`.
    pub fn rms_error(&self, truth: &Signal) -> Result<f64> {
        if self.len() != truth.len() {
            return Err(Error::DimensionMismatch {
                what: "rms_error operands",
                expected: truth.len(),
                got: self.len(),
            });
        }
        let diff: f64 = self
            .values
            .iter()
            .zip(truth.values.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(diff.sqrt() / truth.norm())
    }
}

/// Observed Poisson counts, componentwise nonnegative integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountVector {
    counts: Vec<u64>,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Empty("count vector"));
        }
        Ok(CountVector { counts })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Counts converted to `f64` for arithmetic against intensities.
    pub fn as_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}

/// A penalized objective evaluation. `nll` may be `+inf` when the intensity
/// is infeasible for the observed counts; `total = nll + penalty` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub nll: f64,
    pub penalty: f64,
    pub total: f64,
}

impl ObjectiveValue {
    pub fn new(nll: f64, penalty: f64) -> Self {
        ObjectiveValue {
            nll,
            penalty,
            total: nll + penalty,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
    }
}

fn check_dims(f: &Signal, a: &SensingMatrix, y: &CountVector) -> Result<()> {
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
    Ok(())
}

/// Negative log Poisson likelihood `sum_i [(Af)_i - y_i ln (Af)_i]`.
///
/// Returns `+inf` if some `(Af)_i = 0` while `y_i > 0`; a zero projected
/// intensity against a zero count contributes nothing (`0 ln 0 = 0`).
pub fn poisson_nll(f: &Signal, a: &SensingMatrix, y: &CountVector) -> Result<f64> {
    check_dims(f, a, y)?;
    for (j, &v) in f.values().iter().enumerate() {
        if v < 0.0 {
            return Err(Error::NegativeEntry { index: j, value: v });
        }
    }
    let af = a.mat_vec(f.values());
    let mut total = 0.0;
    for (i, (&mu, &yi)) in af.iter().zip(y.counts().iter()).enumerate() {
        debug_assert!(mu >= 0.0, "A and f nonnegative but (Af)_{i} < 0");
        if mu == 0.0 {
            if yi > 0 {
                return Ok(f64::INFINITY);
            }
            // 0 - 0*ln 0 = 0
        } else {
            total += mu - (yi as f64) * mu.ln();
        }
    }
    Ok(total)
}

/// Gradient of [`poisson_nll`]: `A^T (1 - y ./ (Af))`, with `0/0 := 0`.
///
/// Errors when `(Af)_i = 0` against `y_i > 0`, naming the offending index;
/// the objective has no descent direction there.
pub fn poisson_nll_gradient(f: &Signal, a: &SensingMatrix, y: &CountVector) -> Result<Signal> {
    check_dims(f, a, y)?;
    let af = a.mat_vec(f.values());
    let mut resid = Vec::with_capacity(af.len());
    for (i, (&mu, &yi)) in af.iter().zip(y.counts().iter()).enumerate() {
        if mu == 0.0 {
            if yi > 0 {
                return Err(Error::ZeroIntensityAtPositiveCount { index: i });
            }
            resid.push(1.0); // 1 - 0/0 with 0/0 := 0
        } else {
            resid.push(1.0 - yi as f64 / mu);
        }
    }
    Signal::unconstrained(a.mat_tvec(&resid))
}

/// Penalized objective at `f` given a precomputed penalty value.
pub fn objective(f: &Signal, a: &SensingMatrix, y: &CountVector, penalty: f64) -> Result<ObjectiveValue> {
    Ok(ObjectiveValue::new(poisson_nll(f, a, y)?, penalty))
}

/// EM-based starting point: with `z = A^T y` and `x_i = y_i / (Az)_i`,
/// returns `f0_j = z_j (A^T x)_j / (A^T 1)_j`.
///
/// This is one multiplicative E-step applied to the back-projection `z`.
/// Divisions `0/0` are taken as zero; a zero column of `A` is an error.
pub fn em_init(a: &SensingMatrix, y: &CountVector) -> Result<Signal> {
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
    let z = a.mat_tvec(&y.as_f64());
    let az = a.mat_vec(&z);
    let mut x = Vec::with_capacity(y.len());
    for (i, (&num, &den)) in y.counts().iter().zip(az.iter()).enumerate() {
        if den == 0.0 {
            if num > 0 {
                return Err(Error::ZeroIntensityAtPositiveCount { index: i });
            }
            x.push(0.0);
        } else {
            x.push(num as f64 / den);
        }
    }
    let atx = a.mat_tvec(&x);
    let f0: Vec<f64> = z
        .iter()
        .zip(atx.iter())
        .zip(col_sums.iter())
        .map(|((&zj, &aj), &cj)| zj * aj / cj)
        .collect();
    Signal::nonneg(f0)
}
