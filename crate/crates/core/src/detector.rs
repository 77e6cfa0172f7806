//! Threshold detection under noise uncertainty.
//!
//! For equiprobable binary input the detector compares the received value
//! against a single threshold. A robust optimal threshold (minimising both
//! the upper and the lower error-probability envelope simultaneously) exists
//! iff the mean-uncertainty width is strictly below the symbol distance; it
//! then sits at `(x_a + x_b + mu_hi + mu_lo)/2`.

use crate::channel::{output_cdf_envelope, output_tail_envelope, Constellation, NoiseModel};
use crate::kernel::q;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectorError {
    #[error(
        "no optimal detector: mean-uncertainty width {mean_width} >= symbol distance {symbol_distance}"
    )]
    Nonexistent { mean_width: f64, symbol_distance: f64 },
    #[error("threshold must be finite, got {0}")]
    NonFiniteThreshold(f64),
}

/// Decision rule: output `x_a` iff the received value exceeds the threshold.
/// Ties go to `x_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdDetector {
    threshold: f64,
}

impl ThresholdDetector {
    pub fn new(threshold: f64) -> Result<Self, DetectorError> {
        if !threshold.is_finite() {
            return Err(DetectorError::NonFiniteThreshold(threshold));
        }
        Ok(Self { threshold })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Decide which constellation point was sent given received value `y`.
    pub fn decide(&self, c: &Constellation, y: f64) -> f64 {
        if y > self.threshold {
            c.x_a()
        } else {
            c.x_b()
        }
    }
}

/// Error-probability interval `[pe_lower, pe_upper]` of a detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorEnvelope {
    pe_lower: f64,
    pe_upper: f64,
}

impl ErrorEnvelope {
    pub(crate) fn from_bounds(pe_lower: f64, pe_upper: f64) -> Self {
        let pe_lower = pe_lower.clamp(0.0, 1.0);
        let pe_upper = pe_upper.clamp(0.0, 1.0);
        debug_assert!(pe_lower - pe_upper <= 1e-9, "error envelope inversion");
        Self { pe_lower, pe_upper: pe_upper.max(pe_lower) }
    }

    pub fn pe_lower(&self) -> f64 {
        self.pe_lower
    }

    pub fn pe_upper(&self) -> f64 {
        self.pe_upper
    }
}

/// The robust optimal threshold, if it exists.
///
/// Existence requires `mu_hi - mu_lo < x_a - x_b` strictly; the equality case
/// is reported as nonexistence (the boundary is not covered by either case of
/// the underlying argument, so the conservative answer is returned).
pub fn optimal_threshold(
    c: &Constellation,
    noise: &NoiseModel,
) -> Result<ThresholdDetector, DetectorError> {
    let width = noise.mean().width();
    let distance = c.distance();
    if width >= distance {
        return Err(DetectorError::Nonexistent { mean_width: width, symbol_distance: distance });
    }
    ThresholdDetector::new(0.5 * (c.x_a() + c.x_b() + noise.mean().hi() + noise.mean().lo()))
}

/// Error envelope of an arbitrary threshold rule `y0` under equiprobable
/// symbols: half the CDF envelope at `x_a` plus half the tail envelope at
/// `x_b`, componentwise.
pub fn error_envelope_at_threshold(
    y0: f64,
    c: &Constellation,
    noise: &NoiseModel,
) -> ErrorEnvelope {
    let miss_a = output_cdf_envelope(noise, c.x_a(), y0);
    let false_a = output_tail_envelope(noise, c.x_b(), y0);
    ErrorEnvelope::from_bounds(
        0.5 * miss_a.lower() + 0.5 * false_a.lower(),
        0.5 * miss_a.upper() + 0.5 * false_a.upper(),
    )
}

/// Error envelope of the optimal detector (closed form).
///
/// Requires the existence condition; errors otherwise.
pub fn error_envelope(c: &Constellation, noise: &NoiseModel) -> Result<ErrorEnvelope, DetectorError> {
    let width = noise.mean().width();
    let distance = c.distance();
    if width >= distance {
        return Err(DetectorError::Nonexistent { mean_width: width, symbol_distance: distance });
    }
    let s_lo = noise.sigma().sigma_lo();
    let s_hi = noise.sigma().sigma_hi();
    let denom = s_hi + s_lo;
    let pe_upper = (2.0 * s_hi / denom) * q((distance - width) / (2.0 * s_hi));
    let pe_lower = (2.0 * s_lo / denom) * q((distance + width) / (2.0 * s_lo));
    Ok(ErrorEnvelope::from_bounds(pe_lower, pe_upper))
}

/// Error envelope of the classical minimum-distance rule (midpoint threshold)
/// evaluated under the uncertain noise; the baseline the optimal detector is
/// compared against.
pub fn min_distance_error_envelope(c: &Constellation, noise: &NoiseModel) -> ErrorEnvelope {
    error_envelope_at_threshold(c.midpoint(), c, noise)
}
