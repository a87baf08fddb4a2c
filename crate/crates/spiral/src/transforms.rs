//! Orthonormal bases for the coefficient-space penalty.
//!
//! `f = W theta` with `W` orthonormal, so analysis is `theta = W^T f` and
//! synthesis is `W theta`. Two bases ship: the identity (canonical basis,
//! `theta = f`) and the full-depth orthonormal Haar transform on power-of-two
//! lengths. Coefficient order is the scaling coefficient first, then detail
//! coefficients coarse to fine; e.g. analyze([1,1,1,1]) = [2,0,0,0].

use crate::error::{Error, Result};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Identity,
    Haar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrthoBasis {
    kind: BasisKind,
    len: usize,
}

impl OrthoBasis {
    pub fn identity(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Empty("basis"));
        }
        Ok(OrthoBasis {
            kind: BasisKind::Identity,
            len,
        })
    }

    /// Full-depth Haar basis; `len` must be a power of two.
    pub fn haar(len: usize) -> Result<Self> {
        if !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { len });
        }
        Ok(OrthoBasis {
            kind: BasisKind::Haar,
            len,
        })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_identity(&self) -> bool {
        self.kind == BasisKind::Identity
    }

    fn check_len(&self, got: usize, what: &'static str) -> Result<()> {
        if got != self.len {
            return Err(Error::DimensionMismatch {
                what,
                expected: self.len,
                got,
            });
        }
        Ok(())
    }

    /// theta = W^T f.
    pub fn analyze(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f.len(), "analyze input vs. basis length")?;
        let mut out = f.to_vec();
        if self.kind == BasisKind::Haar {
            let mut half = self.len / 2;
            let mut scratch = vec![0.0; self.len];
            while half >= 1 {
                for i in 0..half {
                    let a = out[2 * i];
                    let b = out[2 * i + 1];
                    scratch[i] = (a + b) * SQRT_HALF;
                    scratch[half + i] = (a - b) * SQRT_HALF;
                }
                out[..2 * half].copy_from_slice(&scratch[..2 * half]);
                half /= 2;
            }
        }
        Ok(out)
    }

    /// f = W theta.
    pub fn synthesize(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_len(theta.len(), "synthesize input vs. basis length")?;
        let mut out = theta.to_vec();
        if self.kind == BasisKind::Haar {
            let mut half = 1;
            let mut scratch = vec![0.0; self.len];
            while 2 * half <= self.len {
                for i in 0..half {
                    let s = out[i];
                    let d = out[half + i];
                    scratch[2 * i] = (s + d) * SQRT_HALF;
                    scratch[2 * i + 1] = (s - d) * SQRT_HALF;
                }
                out[..2 * half].copy_from_slice(&scratch[..2 * half]);
                half *= 2;
            }
        }
        Ok(out)
    }
}
