//! Poisson count simulation.
//!
//! Counts are drawn independently per bin from `Poisson(intensity_i)` using
//! the ChaCha8 stream cipher RNG (seedable and stable across platforms), so a
//! `(intensity, seed)` pair is bit-reproducible. Two samplers are used:
//! Knuth's multiplication method below mean 30 (exact, O(mean) uniforms) and
//! Hörmann's transformed rejection (PTRS) above (O(1) expected uniforms,
//! needed once bins reach hundreds of expected photons).

use crate::error::{Error, Result};
use crate::model::{CountVector, Signal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Draw `y_i ~ Poisson(intensity_i)` independently; deterministic per seed.
pub fn sample_counts(intensity: &Signal, seed: u64) -> Result<CountVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(intensity.len());
    for (i, &lambda) in intensity.values().iter().enumerate() {
        if !lambda.is_finite() {
            return Err(Error::NonFinite {
                index: i,
                value: lambda,
            });
        }
        if lambda < 0.0 {
            return Err(Error::NegativeEntry {
                index: i,
                value: lambda,
            });
        }
        counts.push(poisson_draw(&mut rng, lambda));
    }
    CountVector::new(counts)
}

/// One Poisson(lambda) variate. lambda = 0 returns 0 without consuming
/// randomness, so leading zero bins do not shift the stream of later bins.
pub fn poisson_draw<R: Rng>(rng: &mut R, lambda: f64) -> u64 {
    if lambda == 0.0 {
        0
    } else if lambda < 30.0 {
        knuth(rng, lambda)
    } else {
        ptrs(rng, lambda)
    }
}

/// Multiply uniforms until the product drops below e^{-lambda}.
fn knuth<R: Rng>(rng: &mut R, lambda: f64) -> u64 {
    let limit = (-lambda).exp();
    let mut product: f64 = rng.gen();
    let mut count = 0u64;
    while product > limit {
        count += 1;
        product *= rng.gen::<f64>();
    }
    count
}

/// Hörmann's transformed rejection with squeeze (PTRS), valid for
/// lambda >= 10; used here from 30 up.
fn ptrs<R: Rng>(rng: &mut R, lambda: f64) -> u64 {
    let log_lambda = lambda.ln();
    let b = 0.931 + 2.53 * lambda.sqrt();
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u: f64 = rng.gen::<f64>() - 0.5;
        let v: f64 = rng.gen();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let rhs = k * log_lambda - lambda - libm::lgamma(k + 1.0);
        if (v * inv_alpha / (a / (us * us) + b)).ln() <= rhs {
            return k as u64;
        }
    }
}
