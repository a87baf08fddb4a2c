//! Canonical-basis subproblem: minimize `0.5 ||f - s||^2 + w ||f||_1` over
//! `f >= 0`. Separable, with the closed-form solution `f = [s - w]_+`.

use crate::error::{invalid_param, Result};
use crate::model::Signal;

/// Componentwise `max(s_j - w, 0)`.
pub fn prox_canonical(s: &Signal, w: f64) -> Result<Signal> {
    if !w.is_finite() || w < 0.0 {
        return Err(invalid_param("w", format!("need finite w >= 0, got {w}")));
    }
    Signal::nonneg(s.values().iter().map(|&v| (v - w).max(0.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn objective(f: &[f64], s: &[f64], w: f64) -> f64 {
        let quad: f64 = f.iter().zip(s).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum();
        quad + w * f.iter().map(|v| v.abs()).sum::<f64>()
    }

    #[test]
    fn shrinks_and_clips() {
        let s = Signal::unconstrained(vec![3.0, -1.0, 2.0]).unwrap();
        assert_eq!(prox_canonical(&s, 1.0).unwrap().values(), &[2.0, 0.0, 1.0]);
        let s = Signal::unconstrained(vec![0.5, 0.2]).unwrap();
        assert_eq!(prox_canonical(&s, 1.0).unwrap().values(), &[0.0, 0.0]);
    }

    #[test]
    fn zero_weight_keeps_nonnegative_input() {
        let s = Signal::nonneg(vec![1.0, 0.0, 2.5]).unwrap();
        assert_eq!(prox_canonical(&s, 0.0).unwrap().values(), s.values());
    }

    #[test]
    fn rejects_bad_weight() {
        let s = Signal::nonneg(vec![1.0]).unwrap();
        assert!(prox_canonical(&s, -0.1).is_err());
        assert!(prox_canonical(&s, f64::NAN).is_err());
        assert!(prox_canonical(&s, f64::INFINITY).is_err());
    }

    #[test]
    fn beats_random_feasible_perturbations() {
        let mut rng = StdRng::seed_from_u64(17);
        let s: Vec<f64> = (0..12).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let w = 0.4;
        let f = prox_canonical(&Signal::unconstrained(s.clone()).unwrap(), w).unwrap();
        let best = objective(f.values(), &s, w);
        for _ in 0..1000 {
            let cand: Vec<f64> = f
                .values()
                .iter()
                .map(|&v| (v + rng.gen_range(-0.5..0.5)).max(0.0))
                .collect();
            assert!(objective(&cand, &s, w) >= best - 1e-12);
        }
    }

    #[test]
    fn positively_homogeneous() {
        let mut rng = StdRng::seed_from_u64(18);
        for _ in 0..20 {
            let s: Vec<f64> = (0..8).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let w: f64 = rng.gen_range(0.0..1.0);
            // powers of two scale without rounding, so equality is exact
            let c = 2.0_f64.powi(rng.gen_range(-2..5));
            let base = prox_canonical(&Signal::unconstrained(s.clone()).unwrap(), w).unwrap();
            let scaled_s: Vec<f64> = s.iter().map(|v| c * v).collect();
            let scaled =
                prox_canonical(&Signal::unconstrained(scaled_s).unwrap(), c * w).unwrap();
            for (a, b) in scaled.values().iter().zip(base.values()) {
                assert_eq!(*a, c * *b, "homogeneity broke at c = {c}");
            }
        }
    }

    #[test]
    fn nonexpansive_in_s() {
        let mut rng = StdRng::seed_from_u64(19);
        for _ in 0..50 {
            let s1: Vec<f64> = (0..10).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let s2: Vec<f64> = (0..10).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let w: f64 = rng.gen_range(0.0..1.5);
            let f1 = prox_canonical(&Signal::unconstrained(s1.clone()).unwrap(), w).unwrap();
            let f2 = prox_canonical(&Signal::unconstrained(s2.clone()).unwrap(), w).unwrap();
            let dist_out: f64 = f1
                .values()
                .iter()
                .zip(f2.values())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let dist_in: f64 = s1.iter().zip(&s2).map(|(a, b)| (a - b) * (a - b)).sum();
            assert!(dist_out.sqrt() <= dist_in.sqrt() + 1e-12);
        }
    }
}
