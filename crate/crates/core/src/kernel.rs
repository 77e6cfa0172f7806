//! Gaussian tail function and the semi-G-normal CDF kernels.
//!
//! A G-normal random variable with standard deviation confined to
//! `[sigma_lo, sigma_hi]` does not have a CDF; it has an upper and a lower
//! probability envelope for `{delta <= t}`. Both envelopes reduce to the
//! integral of a two-piece Gaussian density and collapse to the piecewise
//! `Q`-expressions implemented here. Every channel/detector envelope in this
//! crate is a composition of these two kernels.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use thiserror::Error;

/// Beyond this many standard deviations a tail probability is returned as
/// exactly 0 or 1, so downstream envelope comparisons are free of underflow
/// noise.
pub const TAIL_CLAMP_SIGMAS: f64 = 40.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("non-finite input to {0}")]
    NonFinite(&'static str),
    #[error("invalid sigma box [{lo}, {hi}]: need 0 < lo <= hi, both finite")]
    InvalidSigmaBox { lo: f64, hi: f64 },
}

/// Standard-deviation uncertainty interval, `0 < sigma_lo <= sigma_hi`.
///
/// `sigma_hi^2` is the upper variance of the G-normal part of the noise and
/// `sigma_lo^2` the lower variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SigmaBoxRaw")]
pub struct SigmaBox {
    lo: f64,
    hi: f64,
}

#[derive(Deserialize)]
struct SigmaBoxRaw {
    lo: f64,
    hi: f64,
}

impl TryFrom<SigmaBoxRaw> for SigmaBox {
    type Error = KernelError;
    fn try_from(raw: SigmaBoxRaw) -> Result<Self, KernelError> {
        SigmaBox::new(raw.lo, raw.hi)
    }
}

impl SigmaBox {
    pub fn new(lo: f64, hi: f64) -> Result<Self, KernelError> {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(KernelError::InvalidSigmaBox { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// Box with no variance uncertainty.
    pub fn degenerate(sigma: f64) -> Result<Self, KernelError> {
        Self::new(sigma, sigma)
    }

    pub fn sigma_lo(&self) -> f64 {
        self.lo
    }

    pub fn sigma_hi(&self) -> f64 {
        self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    /// Box scaled by a positive factor, e.g. by a fading magnitude.
    pub fn scaled(&self, factor: f64) -> Result<Self, KernelError> {
        Self::new(self.lo * factor, self.hi * factor)
    }
}

/// Gaussian tail `Q(v) = P(V > v)` for standard normal `V`.
///
/// Computed through the complementary error function; absolute error is below
/// 1e-15 for `|v| <= 8` and the relative error stays below 1e-13 on the far
/// tail. `|v| >= 40` is clamped to exactly 0 or 1.
pub fn q_function(v: f64) -> Result<f64, KernelError> {
    if !v.is_finite() {
        return Err(KernelError::NonFinite("q_function"));
    }
    Ok(q(v))
}

/// Infallible `Q` for internal use on already-validated arguments.
pub(crate) fn q(v: f64) -> f64 {
    if v >= TAIL_CLAMP_SIGMAS {
        return 0.0;
    }
    if v <= -TAIL_CLAMP_SIGMAS {
        return 1.0;
    }
    0.5 * libm::erfc(v * FRAC_1_SQRT_2)
}

/// Upper CDF envelope of a G-normal variable: `sup_P P(delta <= t)`.
///
/// Piecewise in `t` with the branch switch at 0:
/// `t <= 0`: `(2*hi/(hi+lo)) * Q(-t/hi)`;
/// `t > 0`:  `(hi-lo)/(hi+lo) + (2*lo/(hi+lo)) * Q(-t/lo)`,
/// evaluated as `1 - (2*lo/(hi+lo)) * Q(t/lo)` so the upper/lower ordering
/// survives rounding in the saturated tails. Continuous, nondecreasing, with
/// limits 0 and 1 reached exactly past the tail clamp.
pub fn semi_g_upper_cdf(t: f64, sigma: &SigmaBox) -> f64 {
    let (lo, hi) = (sigma.lo, sigma.hi);
    let denom = hi + lo;
    if t <= 0.0 {
        (2.0 * hi / denom) * q(-t / hi)
    } else {
        1.0 - (2.0 * lo / denom) * q(t / lo)
    }
}

/// Lower CDF envelope of a G-normal variable: `inf_P P(delta <= t)`.
///
/// `t <= 0`: `(2*lo/(hi+lo)) * (1 - Q(t/lo))`, evaluated as
/// `(2*lo/(hi+lo)) * Q(-t/lo)`;
/// `t > 0`:  `1 - (2*hi/(hi+lo)) * Q(t/hi)`.
pub fn semi_g_lower_cdf(t: f64, sigma: &SigmaBox) -> f64 {
    let (lo, hi) = (sigma.lo, sigma.hi);
    let denom = hi + lo;
    if t <= 0.0 {
        (2.0 * lo / denom) * q(-t / lo)
    } else {
        1.0 - (2.0 * hi / denom) * q(t / hi)
    }
}
