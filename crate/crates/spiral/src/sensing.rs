//! Sparse nonnegative sensing operators.
//!
//! `SensingMatrix` stores an N x m matrix with strictly positive entries in
//! compressed sparse row form. The benchmark generator places exactly `k`
//! ones per row at positions drawn uniformly without replacement, so `A f`
//! of a nonnegative `f` is a sum of `k` signal entries per detector bin.

use crate::error::{invalid_param, Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    n_rows: usize,
    n_cols: usize,
    /// Nonzeros per row when built by the generator; 0 when rows vary.
    row_nnz: usize,
    /// Generator seed; 0 for matrices not built by the generator.
    seed: u64,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SensingMatrix {
    /// The n x n identity.
    pub fn identity(n: usize) -> Self {
        SensingMatrix {
            n_rows: n,
            n_cols: n,
            row_nnz: 1,
            seed: 0,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Random binary sensing matrix: exactly `row_nnz` entries of value 1.0
    /// per row, positions uniform without replacement, reproducible per seed.
    pub fn generate(n_rows: usize, n_cols: usize, row_nnz: usize, seed: u64) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Empty("sensing matrix"));
        }
        if row_nnz == 0 || row_nnz > n_cols {
            return Err(invalid_param(
                "row_nnz",
                format!("need 0 < k <= m, got k = {row_nnz}, m = {n_cols}"),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut indptr = Vec::with_capacity(n_rows + 1);
        let mut indices = Vec::with_capacity(n_rows * row_nnz);
        indptr.push(0);
        for _ in 0..n_rows {
            let mut cols = rand::seq::index::sample(&mut rng, n_cols, row_nnz).into_vec();
            cols.sort_unstable();
            indices.extend_from_slice(&cols);
            indptr.push(indices.len());
        }
        let values = vec![1.0; indices.len()];
        Ok(SensingMatrix {
            n_rows,
            n_cols,
            row_nnz,
            seed,
            indptr,
            indices,
            values,
        })
    }

    /// Build from explicit (row, col, value) triples. Values must be strictly
    /// positive, positions in bounds and distinct.
    pub fn from_triples(
        n_rows: usize,
        n_cols: usize,
        triples: &[(usize, usize, f64)],
    ) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Empty("sensing matrix"));
        }
        for &(r, c, v) in triples {
            if r >= n_rows || c >= n_cols {
                return Err(invalid_param(
                    "triples",
                    format!("entry ({r}, {c}) outside {n_rows} x {n_cols}"),
                ));
            }
            if !v.is_finite() || v <= 0.0 {
                return Err(invalid_param(
                    "triples",
                    format!("value {v} at ({r}, {c}) must be finite and > 0"),
                ));
            }
        }
        let mut sorted = triples.to_vec();
        sorted.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for pair in sorted.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(invalid_param(
                    "triples",
                    format!("duplicate entry at ({}, {})", pair[0].0, pair[0].1),
                ));
            }
        }
        let mut indptr = vec![0usize; n_rows + 1];
        for &(r, _, _) in &sorted {
            indptr[r + 1] += 1;
        }
        for r in 0..n_rows {
            indptr[r + 1] += indptr[r];
        }
        let indices: Vec<usize> = sorted.iter().map(|t| t.1).collect();
        let values: Vec<f64> = sorted.iter().map(|t| t.2).collect();
        // Uniform per-row count is metadata for serialization; 0 when mixed.
        let counts: Vec<usize> = (0..n_rows).map(|r| indptr[r + 1] - indptr[r]).collect();
        let row_nnz = if counts.windows(2).all(|w| w[0] == w[1]) {
            counts[0]
        } else {
            0
        };
        Ok(SensingMatrix {
            n_rows,
            n_cols,
            row_nnz,
            seed: 0,
            indptr,
            indices,
            values,
        })
    }

    /// Attach generator metadata; serialization round-trips use this to
    /// restore the header of a saved matrix.
    pub fn with_metadata(mut self, row_nnz: usize, seed: u64) -> Self {
        self.row_nnz = row_nnz;
        self.seed = seed;
        self
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row_nnz(&self) -> usize {
        self.row_nnz
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Iterate stored entries as (row, col, value) in row-major order.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1])
                .map(move |p| (r, self.indices[p], self.values[p]))
        })
    }

    /// y = A x.
    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols, "mat_vec: x length != n_cols");
        let mut out = vec![0.0; self.n_rows];
        for r in 0..self.n_rows {
            let mut acc = 0.0;
            for p in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[p] * x[self.indices[p]];
            }
            out[r] = acc;
        }
        out
    }

    /// y = A^T x.
    pub fn mat_tvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_rows, "mat_tvec: x length != n_rows");
        let mut out = vec![0.0; self.n_cols];
        for r in 0..self.n_rows {
            let xr = x[r];
            if xr == 0.0 {
                continue;
            }
            for p in self.indptr[r]..self.indptr[r + 1] {
                out[self.indices[p]] += self.values[p] * xr;
            }
        }
        out
    }

    /// Column sums, i.e. A^T 1.
    pub fn column_sums(&self) -> Vec<f64> {
        self.mat_tvec(&vec![1.0; self.n_rows])
    }

    /// Dense row-major copy; intended for small oracles and tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (r, c, v) in self.triples() {
            dense[r][c] = v;
        }
        dense
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn generated_rows_have_exact_support() {
        let a = SensingMatrix::generate(512, 1024, 32, 4).unwrap();
        assert_eq!(a.nnz(), 512 * 32);
        let row_sums = a.mat_vec(&vec![1.0; 1024]);
        assert!(row_sums.iter().all(|&s| s == 32.0));
        assert!(a.triples().all(|(_, _, v)| v == 1.0));
        // positions within each row are distinct and sorted
        for r in 0..512 {
            let cols: Vec<usize> = a
                .triples()
                .filter(|&(row, _, _)| row == r)
                .map(|(_, c, _)| c)
                .collect();
            assert!(cols.windows(2).all(|w| w[0] < w[1]), "row {r} not strictly sorted");
        }
    }

    #[test]
    fn full_support_row_is_all_ones() {
        let a = SensingMatrix::generate(3, 4, 4, 9).unwrap();
        for row in a.to_dense() {
            assert_eq!(row, vec![1.0; 4]);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = SensingMatrix::generate(1, 4, 2, 77).unwrap();
        let b = SensingMatrix::generate(1, 4, 2, 77).unwrap();
        assert_eq!(a.triples().collect::<Vec<_>>(), b.triples().collect::<Vec<_>>());
        let c = SensingMatrix::generate(16, 64, 8, 1).unwrap();
        let d = SensingMatrix::generate(16, 64, 8, 1).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn oversized_support_rejected() {
        assert!(SensingMatrix::generate(4, 4, 5, 0).is_err());
        assert!(SensingMatrix::generate(4, 4, 0, 0).is_err());
        assert!(SensingMatrix::generate(0, 4, 1, 0).is_err());
    }

    #[test]
    fn triples_round_trip() {
        let a = SensingMatrix::generate(6, 10, 3, 5).unwrap();
        let t: Vec<_> = a.triples().collect();
        let b = SensingMatrix::from_triples(6, 10, &t).unwrap();
        assert_eq!(a.to_dense(), b.to_dense());
        assert_eq!(b.row_nnz(), 3);
    }

    #[test]
    fn from_triples_validation() {
        assert!(SensingMatrix::from_triples(2, 2, &[(2, 0, 1.0)]).is_err());
        assert!(SensingMatrix::from_triples(2, 2, &[(0, 0, 0.0)]).is_err());
        assert!(SensingMatrix::from_triples(2, 2, &[(0, 0, -1.0)]).is_err());
        assert!(SensingMatrix::from_triples(2, 2, &[(0, 0, 1.0), (0, 0, 2.0)]).is_err());
        let mixed = SensingMatrix::from_triples(2, 2, &[(0, 0, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert_eq!(mixed.unwrap().row_nnz(), 0);
    }

    #[test]
    fn products_match_dense_arithmetic() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.gen_range(1..8);
            let m = rng.gen_range(1..12);
            let k = rng.gen_range(1..=m);
            let a = SensingMatrix::generate(n, m, k, rng.gen()).unwrap();
            let dense = a.to_dense();
            let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let got = a.mat_vec(&x);
            for i in 0..n {
                let want: f64 = (0..m).map(|j| dense[i][j] * x[j]).sum();
                assert!((got[i] - want).abs() < 1e-12);
            }
            let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let got_t = a.mat_tvec(&z);
            for j in 0..m {
                let want: f64 = (0..n).map(|i| dense[i][j] * z[i]).sum();
                assert!((got_t[j] - want).abs() < 1e-12);
            }
            let sums = a.column_sums();
            for j in 0..m {
                let want: f64 = (0..n).map(|i| dense[i][j]).sum();
                assert!((sums[j] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_products_are_copies() {
        let a = SensingMatrix::identity(5);
        let x = vec![1.0, -2.0, 3.0, 0.0, 0.5];
        assert_eq!(a.mat_vec(&x), x);
        assert_eq!(a.mat_tvec(&x), x);
        assert_eq!(a.column_sums(), vec![1.0; 5]);
    }
}
