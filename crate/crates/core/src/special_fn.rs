//! Gaussian tail function and its inverse.
//!
//! `q_func` is backed by the C-library style `erfc` from `libm`, which keeps
//! full relative precision deep into the upper tail. `q_inv` starts from a
//! rational approximation of the normal quantile (relative error ~1e-9) and
//! polishes it with two Newton steps on `Q(x) - eps`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A block error probability, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ErrorProb(f64);

impl ErrorProb {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::Domain {
                what: "error probability must lie in (0, 1)",
                value,
            })
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `Q^{-1}(eps)`.
    pub fn q_inv(self) -> f64 {
        q_inv_unchecked(self.0)
    }
}

impl TryFrom<f64> for ErrorProb {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ErrorProb> for f64 {
    fn from(p: ErrorProb) -> f64 {
        p.0
    }
}

/// Upper tail of the standard normal, `P[Z > x]`.
pub fn q_func(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Inverse of [`q_func`].
pub fn q_inv(eps: f64) -> Result<f64> {
    ErrorProb::new(eps).map(ErrorProb::q_inv)
}

/// Standard normal density.
#[inline]
fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

fn q_inv_unchecked(eps: f64) -> f64 {
    // Q^{-1}(eps) = -Phi^{-1}(eps)
    let mut x = -normal_quantile_guess(eps);
    for _ in 0..2 {
        let d = phi(x);
        if d == 0.0 {
            break;
        }
        x += (q_func(x) - eps) / d;
    }
    x
}

// Rational approximation of the lower-tail normal quantile (P. J. Acklam).
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.02425;

fn normal_quantile_guess(p: f64) -> f64 {
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}
