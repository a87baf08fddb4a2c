//! Deterministic piecewise-smooth test signals and count-rate calibration.
//!
//! The shape is a fixed layout of two constant plateaus, one linear ramp,
//! and two truncated Gaussian bumps on the unit interval; only the five
//! feature amplitudes depend on the seed. The region between the second
//! plateau and the ramp (x in [0.32, 0.46)) is wider than one sample
//! spacing for every m >= 8, so the generated signal always attains an
//! exact zero there.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spiral::{Error, Result, SensingMatrix, Signal};

/// Feature layout in normalized coordinates x = (i + 0.5) / m.
const PLATEAU_1: (f64, f64) = (0.05, 0.15);
const PLATEAU_2: (f64, f64) = (0.20, 0.32);
const RAMP: (f64, f64) = (0.46, 0.58);
const BUMP_1: (f64, f64) = (0.66, 0.02); // (center, width)
const BUMP_2: (f64, f64) = (0.84, 0.04);
/// Bumps are cut to exact zero beyond this many widths from the center.
const BUMP_CUTOFF: f64 = 3.5;

fn bump(x: f64, center: f64, width: f64, amplitude: f64) -> f64 {
    let z = (x - center) / width;
    if z.abs() > BUMP_CUTOFF {
        0.0
    } else {
        amplitude * (-0.5 * z * z).exp()
    }
}

/// Unit-scale test signal: plateaus, a ramp and two smooth bumps with
/// seed-dependent amplitudes, exact zeros between features. Deterministic
/// in `(m, seed)`.
pub fn generate_test_signal(m: usize, seed: u64) -> Result<Signal> {
    if m < 8 {
        return Err(Error::InvalidParameter {
            name: "m",
            message: format!("test signal needs m >= 8, got {m}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p1 = rng.gen_range(0.6..1.0);
    let p2 = rng.gen_range(0.25..0.6);
    let ramp_top = rng.gen_range(0.5..1.0);
    let b1 = rng.gen_range(0.6..1.0);
    let b2 = rng.gen_range(0.3..0.8);

    let mut values = Vec::with_capacity(m);
    for i in 0..m {
        let x = (i as f64 + 0.5) / m as f64;
        let mut v = 0.0;
        if x >= PLATEAU_1.0 && x < PLATEAU_1.1 {
            v += p1;
        }
        if x >= PLATEAU_2.0 && x < PLATEAU_2.1 {
            v += p2;
        }
        if x >= RAMP.0 && x < RAMP.1 {
            v += ramp_top * (x - RAMP.0) / (RAMP.1 - RAMP.0);
        }
        v += bump(x, BUMP_1.0, BUMP_1.1, b1);
        v += bump(x, BUMP_2.0, BUMP_2.1, b2);
        values.push(v);
    }
    Signal::nonneg(values)
}

/// Rescale `f` so that the mean of `A f` equals `target`. One multiplicative
/// factor, so the result keeps the shape (and its exact zeros).
pub fn calibrate_to_mean_count(f: &Signal, a: &SensingMatrix, target: f64) -> Result<Signal> {
    if !target.is_finite() || target <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "target",
            message: format!("need finite mean count > 0, got {target}"),
        });
    }
    let intensity = a.mat_vec(f.values());
    let mean = intensity.iter().sum::<f64>() / intensity.len() as f64;
    if mean <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "signal",
            message: "A f has zero mean; the matrix never observes the signal".into(),
        });
    }
    let scale = target / mean;
    Signal::nonneg(f.values().iter().map(|v| v * scale).collect::<Vec<_>>())
}
