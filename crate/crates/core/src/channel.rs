//! Channel model with mean/variance-uncertain additive noise, its output
//! probability envelopes and SNR bounds.
//!
//! The noise is `Z = M + delta` where `M` carries the mean uncertainty
//! (any law concentrated on `[mu_lo, mu_hi]`) and `delta` the variance
//! uncertainty (G-normal with sigma in a [`SigmaBox`]). A degenerate mean
//! interval expresses the no-mean-uncertainty channel; all of its formulas
//! are the `mu_lo == mu_hi` specialisation of the general ones.

use crate::kernel::{q, semi_g_lower_cdf, semi_g_upper_cdf, SigmaBox};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("invalid interval [{lo}, {hi}]: need lo <= hi, both finite")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("invalid constellation ({x_a}, {x_b}): need x_a > x_b, both finite")]
    InvalidConstellation { x_a: f64, x_b: f64 },
}

/// Closed interval `[lo, hi]` housing an uncertain parameter (here: the mean).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IntervalRaw")]
pub struct UncertaintyInterval {
    lo: f64,
    hi: f64,
}

#[derive(Deserialize)]
struct IntervalRaw {
    lo: f64,
    hi: f64,
}

impl TryFrom<IntervalRaw> for UncertaintyInterval {
    type Error = ChannelError;
    fn try_from(raw: IntervalRaw) -> Result<Self, ChannelError> {
        UncertaintyInterval::new(raw.lo, raw.hi)
    }
}

impl UncertaintyInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, ChannelError> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(ChannelError::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// Interval collapsed to a single point.
    pub fn point(value: f64) -> Result<Self, ChannelError> {
        Self::new(value, value)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.lo && value <= self.hi
    }
}

/// Full description of the uncertain additive noise `Z = M + delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    mean: UncertaintyInterval,
    sigma: SigmaBox,
}

impl NoiseModel {
    pub fn new(mean: UncertaintyInterval, sigma: SigmaBox) -> Self {
        Self { mean, sigma }
    }

    /// Classical Gaussian noise: degenerate mean and sigma intervals.
    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self, ChannelError> {
        let mean = UncertaintyInterval::point(mu)?;
        let sigma = SigmaBox::degenerate(sigma)
            .map_err(|_| ChannelError::InvalidInterval { lo: sigma, hi: sigma })?;
        Ok(Self { mean, sigma })
    }

    pub fn mean(&self) -> &UncertaintyInterval {
        &self.mean
    }

    pub fn sigma(&self) -> &SigmaBox {
        &self.sigma
    }

    /// True iff there is no uncertainty at all (classical Gaussian noise).
    pub fn is_degenerate(&self) -> bool {
        self.mean.is_degenerate() && self.sigma.is_degenerate()
    }
}

/// Binary input pair `x_a > x_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConstellationRaw")]
pub struct Constellation {
    x_a: f64,
    x_b: f64,
}

#[derive(Deserialize)]
struct ConstellationRaw {
    x_a: f64,
    x_b: f64,
}

impl TryFrom<ConstellationRaw> for Constellation {
    type Error = ChannelError;
    fn try_from(raw: ConstellationRaw) -> Result<Self, ChannelError> {
        Constellation::new(raw.x_a, raw.x_b)
    }
}

impl Constellation {
    pub fn new(x_a: f64, x_b: f64) -> Result<Self, ChannelError> {
        if !(x_a.is_finite() && x_b.is_finite() && x_a > x_b) {
            return Err(ChannelError::InvalidConstellation { x_a, x_b });
        }
        Ok(Self { x_a, x_b })
    }

    pub fn x_a(&self) -> f64 {
        self.x_a
    }

    pub fn x_b(&self) -> f64 {
        self.x_b
    }

    pub fn distance(&self) -> f64 {
        self.x_a - self.x_b
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.x_a + self.x_b)
    }
}

/// Interval of probabilities `[lower, upper]` for one event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityEnvelope {
    lower: f64,
    upper: f64,
}

impl ProbabilityEnvelope {
    /// Builds an envelope from raw bounds, clamping both into `[0, 1]`.
    /// Floating-point noise can leave `lower` a few ulps above `upper` in
    /// fully degenerate models; anything larger is a logic error.
    pub(crate) fn from_bounds(lower: f64, upper: f64) -> Self {
        let lower = lower.clamp(0.0, 1.0);
        let upper = upper.clamp(0.0, 1.0);
        debug_assert!(lower - upper <= 1e-9, "envelope inversion: {lower} > {upper}");
        Self { lower, upper: upper.max(lower) }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, p: f64) -> bool {
        p >= self.lower && p <= self.upper
    }
}

/// SNR interval plus its midpoint (the scalar SNR used by sweeps).
///
/// `snr_lo == 0` encodes the regime where the mean-uncertainty width reaches
/// the symbol distance and the lower SNR bound is invalid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnrBounds {
    pub snr_lo: f64,
    pub snr_hi: f64,
    pub snr: f64,
}

/// Envelope of `P(Y <= y)` given input `x`.
///
/// The upper envelope switches branch at `y = x + mu_lo` and the lower at
/// `y = x + mu_hi`; both are the semi-G-normal kernels evaluated at the
/// mean-shifted argument.
pub fn output_cdf_envelope(noise: &NoiseModel, x: f64, y: f64) -> ProbabilityEnvelope {
    let upper = semi_g_upper_cdf(y - x - noise.mean.lo(), noise.sigma());
    let lower = semi_g_lower_cdf(y - x - noise.mean.hi(), noise.sigma());
    ProbabilityEnvelope::from_bounds(lower, upper)
}

/// Envelope of `P(Y > y)` given input `x`; exact complement of
/// [`output_cdf_envelope`].
pub fn output_tail_envelope(noise: &NoiseModel, x: f64, y: f64) -> ProbabilityEnvelope {
    let upper = 1.0 - semi_g_lower_cdf(y - x - noise.mean.hi(), noise.sigma());
    let lower = 1.0 - semi_g_upper_cdf(y - x - noise.mean.lo(), noise.sigma());
    ProbabilityEnvelope::from_bounds(lower, upper)
}

/// SNR bounds for a binary constellation over the uncertain noise.
pub fn snr_bounds(c: &Constellation, noise: &NoiseModel) -> SnrBounds {
    let d = c.distance();
    let w = noise.mean.width();
    let s_lo = noise.sigma.sigma_lo();
    let s_hi = noise.sigma.sigma_hi();
    let snr_hi = (d + w).powi(2) / (8.0 * s_lo * s_lo);
    let snr_lo = if w < d {
        (d - w).powi(2) / (8.0 * s_hi * s_hi)
    } else {
        0.0
    };
    SnrBounds { snr_lo, snr_hi, snr: 0.5 * (snr_lo + snr_hi) }
}

/// Standard deviation of the classical AWGN channel whose SNR equals the SNR
/// of the no-mean-uncertainty channel with this sigma box:
/// `sigma^2 = 2*hi^2*lo^2 / (hi^2 + lo^2)`.
pub fn awgn_equivalent_sigma(sigma: &SigmaBox) -> f64 {
    let lo2 = sigma.sigma_lo() * sigma.sigma_lo();
    let hi2 = sigma.sigma_hi() * sigma.sigma_hi();
    (2.0 * hi2 * lo2 / (hi2 + lo2)).sqrt()
}

/// Classical AWGN error probability at a given scalar SNR: `Q(sqrt(2*SNR))`.
pub fn awgn_error_probability(snr: f64) -> f64 {
    q((2.0 * snr).sqrt())
}
