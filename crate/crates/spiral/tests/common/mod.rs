//! Shared oracles for integration tests: independent re-implementations
//! that the library code is checked against.

// each test target uses a subset of these helpers
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;
use spiral::{sample_counts, CountVector, SensingMatrix, Signal};

/// Every recursive dyadic partition of [start, start + len), the fully
/// merged one first, then refinements as left x right cross products. The
/// "merged first" order makes keep-first-minimum selection reproduce a
/// merge-preferred tie-break.
pub fn all_rdps(start: usize, len: usize) -> Vec<Vec<(usize, usize)>> {
    if len == 1 {
        return vec![vec![(start, 1)]];
    }
    let mut out = vec![vec![(start, len)]];
    let half = len / 2;
    for left in all_rdps(start, half) {
        for right in all_rdps(start + half, half) {
            let mut p = left.clone();
            p.extend_from_slice(&right);
            out.push(p);
        }
    }
    out
}

/// Direct cost of a partition: per-interval clamped-mean fit, summed SSE,
/// tau per interval. Deliberately avoids prefix sums.
pub fn partition_cost(s: &[f64], partition: &[(usize, usize)], tau: f64) -> f64 {
    let mut cost = 0.0;
    for &(start, len) in partition {
        let chunk = &s[start..start + len];
        let mean = chunk.iter().sum::<f64>() / len as f64;
        let c = mean.max(0.0);
        let sse: f64 = chunk.iter().map(|v| (v - c) * (v - c)).sum();
        cost += 0.5 * sse + tau;
    }
    cost
}

/// Exhaustive minimum over all RDPs; first strict minimum in merged-first
/// order, i.e. the merge-preferred optimum.
pub fn best_partition_by_enumeration(s: &[f64], tau: f64) -> (Vec<(usize, usize)>, f64) {
    let mut best: Option<(Vec<(usize, usize)>, f64)> = None;
    for p in all_rdps(0, s.len()) {
        let cost = partition_cost(s, &p, tau);
        if best.as_ref().map_or(true, |(_, c)| cost < *c) {
            best = Some((p, cost));
        }
    }
    best.expect("at least the root partition exists")
}

/// Random sensing matrix whose columns all touch at least one row, so the
/// EM starting point is well-defined.
pub fn full_column_matrix(rng: &mut StdRng, n: usize, m: usize, k: usize) -> SensingMatrix {
    loop {
        let a = SensingMatrix::generate(n, m, k, rng.gen()).unwrap();
        if a.column_sums().iter().all(|&c| c > 0.0) {
            return a;
        }
    }
}

/// A sparse nonnegative truth, its sensing matrix, and one Poisson draw.
pub fn counts_instance(
    rng: &mut StdRng,
    n: usize,
    m: usize,
    k: usize,
) -> (SensingMatrix, Signal, CountVector) {
    let a = full_column_matrix(rng, n, m, k);
    let truth: Vec<f64> = (0..m)
        .map(|j| {
            if j % 4 == 0 {
                rng.gen_range(1.0..6.0)
            } else {
                0.0
            }
        })
        .collect();
    let truth = Signal::nonneg(truth).unwrap();
    let y = sample_counts(
        &Signal::nonneg(a.mat_vec(truth.values())).unwrap(),
        rng.gen(),
    )
    .unwrap();
    (a, truth, y)
}

/// Dense gradient of the Poisson NLL, computed with nested loops over a
/// dense copy of A (the oracle for the CSR implementation).
pub fn dense_nll_gradient(f: &[f64], a: &SensingMatrix, y: &[u64]) -> Vec<f64> {
    let dense = a.to_dense();
    let n = a.n_rows();
    let m = a.n_cols();
    let mut af = vec![0.0; n];
    for i in 0..n {
        for j in 0..m {
            af[i] += dense[i][j] * f[j];
        }
    }
    let mut g = vec![0.0; m];
    for j in 0..m {
        for i in 0..n {
            let ratio = if af[i] == 0.0 { 0.0 } else { y[i] as f64 / af[i] };
            g[j] += dense[i][j] * (1.0 - ratio);
        }
    }
    g
}
