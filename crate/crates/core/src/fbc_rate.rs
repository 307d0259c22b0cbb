//! Finite-blocklength rate model.
//!
//! The normal approximation of the achievable rate over `m` channel uses at
//! SINR `gamma` and block error probability `eps` is
//!
//! ```text
//! R(m, gamma) = log2(1 + gamma) - sqrt((1 - 1/(1+gamma)^2) / m) * Q^{-1}(eps) / ln 2
//! ```
//!
//! A user that must deliver `N` bits satisfies `F(m, gamma) = N/m - R(m, gamma) = 0`.
//! `F` is the required rate minus the achieved rate, so it is positive when the
//! block is too short and negative when there is rate to spare.
//!
//! `F = 0` is a quadratic in `sqrt(m)`, which gives the closed-form blocklength
//! `m_of_gamma`. Its inverse `gamma_of_m` has no closed form and is found by
//! bisection on `gamma`.

use std::f64::consts::{LN_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::ErrorProb;

/// Minimum blocklength below which the normal approximation is not trusted.
pub const DEFAULT_MIN_BLOCKLENGTH: u32 = 100;

/// Default absolute width of the SINR bracket when bisection stops.
pub const DEFAULT_TOL: f64 = 1e-9;

const MAX_BISECTION_ITERS: u32 = 200;

/// Reliability and latency requirement of one receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserSpec {
    /// Packet size `N` in bits.
    pub payload_bits: u32,
    pub error_target: ErrorProb,
    /// Deadline `D` in channel uses.
    pub deadline: u32,
    /// Smallest admissible blocklength `m_hat`.
    pub min_blocklength: u32,
}

impl UserSpec {
    pub fn new(
        payload_bits: u32,
        error_target: f64,
        deadline: u32,
        min_blocklength: u32,
    ) -> Result<Self> {
        let error_target = ErrorProb::new(error_target)?;
        if payload_bits == 0 {
            return Err(Error::InvalidSpec(
                "payload must be at least one bit".into(),
            ));
        }
        if min_blocklength == 0 {
            return Err(Error::InvalidSpec(
                "minimum blocklength must be positive".into(),
            ));
        }
        if min_blocklength > deadline {
            return Err(Error::InvalidSpec(format!(
                "minimum blocklength {min_blocklength} exceeds deadline {deadline}"
            )));
        }
        Ok(Self {
            payload_bits,
            error_target,
            deadline,
            min_blocklength,
        })
    }

    /// Spec with the customary minimum blocklength of 100 channel uses.
    pub fn with_default_min(payload_bits: u32, error_target: f64, deadline: u32) -> Result<Self> {
        Self::new(
            payload_bits,
            error_target,
            deadline,
            DEFAULT_MIN_BLOCKLENGTH,
        )
    }

    pub fn with_error_target(self, error_target: ErrorProb) -> Self {
        Self {
            error_target,
            ..self
        }
    }

    pub fn with_deadline(self, deadline: u32) -> Result<Self> {
        Self::new(
            self.payload_bits,
            self.error_target.value(),
            deadline,
            self.min_blocklength,
        )
    }

    pub(crate) fn model(&self) -> RateModel {
        RateModel::new(self.payload_bits as f64, self.error_target)
    }
}

/// A blocklength/SINR pair on the curve `F(m, gamma) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub blocklength: f64,
    pub sinr: f64,
}

/// `N` and `Q^{-1}(eps)/ln 2` precomputed so the inner loops skip the quantile.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RateModel {
    bits: f64,
    dispersion: f64,
}

/// `1 - 1/(1+gamma)^2`, written to stay accurate for small `gamma`.
#[inline]
fn channel_dispersion(gamma: f64) -> f64 {
    let d = 1.0 + gamma;
    gamma * (gamma + 2.0) / (d * d)
}

impl RateModel {
    pub(crate) fn new(bits: f64, eps: ErrorProb) -> Self {
        Self {
            bits,
            dispersion: eps.q_inv() / LN_2,
        }
    }

    #[inline]
    fn rate(&self, m: f64, gamma: f64) -> f64 {
        gamma.ln_1p() / LN_2 - (channel_dispersion(gamma) / m).sqrt() * self.dispersion
    }

    #[inline]
    fn residual(&self, m: f64, gamma: f64) -> f64 {
        self.bits / m - self.rate(m, gamma)
    }

    #[inline]
    pub(crate) fn blocklength(&self, gamma: f64) -> f64 {
        let c = gamma.ln_1p() / LN_2;
        let a = self.dispersion * channel_dispersion(gamma).sqrt();
        let root = (a + (a * a + 4.0 * self.bits * c).sqrt()) / (2.0 * c);
        root * root
    }

    pub(crate) fn sinr(&self, m_star: f64, gamma_hi: f64, tol: f64) -> Result<f64> {
        let m_at_hi = self.blocklength(gamma_hi);
        if m_at_hi > m_star {
            return Err(Error::Bracket {
                m_star,
                gamma_hi,
                m_at_hi,
            });
        }
        let (mut lo, mut hi) = (0.0_f64, gamma_hi);
        for _ in 0..MAX_BISECTION_ITERS {
            // absolute width for gamma >= 1, relative below
            if hi - lo <= tol * hi.min(1.0) {
                return Ok(0.5 * (lo + hi));
            }
            let mid = 0.5 * (lo + hi);
            if self.blocklength(mid) < m_star {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Err(Error::NoConvergence {
            iterations: MAX_BISECTION_ITERS,
        })
    }

    /// Grows the bracket from 1 until it contains the root, then bisects.
    pub(crate) fn sinr_unbounded(&self, m_star: f64, tol: f64) -> Result<f64> {
        let mut hi = 1.0_f64;
        while self.blocklength(hi) > m_star {
            hi *= 2.0;
            if hi > 1e15 {
                return Err(Error::Bracket {
                    m_star,
                    gamma_hi: hi,
                    m_at_hi: self.blocklength(hi),
                });
            }
        }
        self.sinr(m_star, hi, tol)
    }
}

fn check_positive(what: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what, value })
    }
}

/// Achievable rate in bits per channel use. Can be negative for very short blocks.
pub fn fbc_rate(m: f64, gamma: f64, eps: ErrorProb) -> Result<f64> {
    check_positive("blocklength must be positive", m)?;
    check_positive("SINR must be positive", gamma)?;
    Ok(RateModel::new(0.0, eps).rate(m, gamma))
}

/// Required minus achieved rate, `N/m - R(m, gamma)`.
pub fn f_constraint(m: f64, gamma: f64, spec: &UserSpec) -> Result<f64> {
    check_positive("blocklength must be positive", m)?;
    check_positive("SINR must be positive", gamma)?;
    Ok(spec.model().residual(m, gamma))
}

/// Blocklength that delivers the payload exactly at SINR `gamma`.
pub fn m_of_gamma(gamma: f64, spec: &UserSpec) -> Result<f64> {
    check_positive("SINR must be positive", gamma)?;
    Ok(spec.model().blocklength(gamma))
}

/// SINR that delivers the payload in exactly `m_star` channel uses, searched
/// on `[0, gamma_hi]` until the bracket is narrower than `tol`.
///
/// Returns [`Error::Bracket`] when `gamma_hi` itself is not enough. The
/// minimum-blocklength constraint is not checked here; solvers enforce it.
pub fn gamma_of_m(m_star: f64, spec: &UserSpec, gamma_hi: f64, tol: f64) -> Result<f64> {
    check_positive("blocklength must be positive", m_star)?;
    check_positive("SINR upper bound must be positive", gamma_hi)?;
    check_positive("tolerance must be positive", tol)?;
    spec.model().sinr(m_star, gamma_hi, tol)
}

/// Point on the rate curve at blocklength `m`.
pub fn rate_point(m: f64, spec: &UserSpec) -> Result<RatePoint> {
    check_positive("blocklength must be positive", m)?;
    let sinr = spec.model().sinr_unbounded(m, DEFAULT_TOL)?;
    Ok(RatePoint {
        blocklength: m,
        sinr,
    })
}

/// `m * Gamma(m)`: transmit energy per unit channel gain for a block of length `m`.
pub fn energy_curve(m: f64, spec: &UserSpec) -> Result<f64> {
    let p = rate_point(m, spec)?;
    Ok(p.blocklength * p.sinr)
}

/// `2 sqrt(ln 2) / (4 - sqrt 2)`, the bound on `Q^{-1}(eps)/sqrt(N)` under
/// which `m * Gamma(m)` is strictly decreasing.
pub fn lemma1_threshold() -> f64 {
    2.0 * LN_2.sqrt() / (4.0 - SQRT_2)
}

/// Whether the spec satisfies the monotonicity condition on `m * Gamma(m)`.
pub fn lemma1_holds(spec: &UserSpec) -> bool {
    spec.error_target.q_inv() / (spec.payload_bits as f64).sqrt() <= lemma1_threshold()
}
