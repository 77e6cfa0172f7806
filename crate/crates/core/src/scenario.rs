//! Classical noise generators living inside the uncertainty box.
//!
//! The sublinear-expectation noise model is a *family* of laws; a scenario
//! policy picks one concrete member (or mixture member) by choosing a
//! per-sample `(mu_i, sigma_i)` inside `[mu_lo, mu_hi] x [sigma_lo, sigma_hi]`
//! and drawing sample `i` from `N(mu_i, sigma_i^2)`. Envelopes must contain
//! the resulting empirical CDFs for every policy; they need not be attained
//! by any of them.
//!
//! Generation is deterministic in `(policy, noise, n, seed)` and independent
//! of parallel partitioning: all draws go through per-index counter-based
//! generators from [`crate::rng`].

use crate::channel::NoiseModel;
use crate::rng::{stream_rng, RngSeed};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub(crate) const STREAM_PARAM: u64 = 1;
pub(crate) const STREAM_BLOCK: u64 = 2;
pub(crate) const STREAM_NOISE: u64 = 3;
pub(crate) const STREAM_GAIN: u64 = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("policy parameter ({mu}, {sigma}) lies outside the uncertainty box")]
    OutsideBox { mu: f64, sigma: f64 },
    #[error("invalid policy parameter: {0}")]
    BadParameter(String),
    #[error("custom schedule has {actual} entries, need exactly {expected}")]
    ScheduleLength { expected: u64, actual: u64 },
}

/// Rule choosing the per-sample `(mu_i, sigma_i)` inside the uncertainty box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioPolicy {
    /// One fixed classical law for every sample.
    Fixed { mu: f64, sigma: f64 },
    /// `mu_i` and `sigma_i` drawn i.i.d. uniformly over the box.
    IidUniformBox,
    /// With probability `p` the sample sits at the `(mu_hi, sigma_hi)` corner,
    /// otherwise at `(mu_lo, sigma_lo)`.
    TwoPointSwitch { p: f64 },
    /// Consecutive blocks of `block_len` samples; each block draws one of the
    /// four box corners uniformly.
    BlockSwitch { block_len: u64 },
    /// Explicit per-sample schedule, consumed positionally.
    Custom { schedule: Vec<(f64, f64)> },
}

impl ScenarioPolicy {
    /// Checks the policy against the box (and requested length) before any
    /// generation. Stochastic policies are box-contained by construction.
    pub fn validate(&self, noise: &NoiseModel, n: u64) -> Result<(), ScenarioError> {
        let mean = noise.mean();
        let sigma = noise.sigma();
        let inside = |mu: f64, s: f64| {
            mean.contains(mu) && s >= sigma.sigma_lo() && s <= sigma.sigma_hi()
        };
        match self {
            ScenarioPolicy::Fixed { mu, sigma: s } => {
                if !inside(*mu, *s) {
                    return Err(ScenarioError::OutsideBox { mu: *mu, sigma: *s });
                }
            }
            ScenarioPolicy::IidUniformBox => {}
            ScenarioPolicy::TwoPointSwitch { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(ScenarioError::BadParameter(format!(
                        "switch probability {p} outside [0, 1]"
                    )));
                }
            }
            ScenarioPolicy::BlockSwitch { block_len } => {
                if *block_len == 0 {
                    return Err(ScenarioError::BadParameter("block_len must be >= 1".into()));
                }
            }
            ScenarioPolicy::Custom { schedule } => {
                if schedule.len() as u64 != n {
                    return Err(ScenarioError::ScheduleLength {
                        expected: n,
                        actual: schedule.len() as u64,
                    });
                }
                for &(mu, s) in schedule {
                    if !inside(mu, s) {
                        return Err(ScenarioError::OutsideBox { mu, sigma: s });
                    }
                }
            }
        }
        Ok(())
    }

    fn corner(noise: &NoiseModel, mean_hi: bool, sigma_hi: bool) -> (f64, f64) {
        (
            if mean_hi { noise.mean().hi() } else { noise.mean().lo() },
            if sigma_hi { noise.sigma().sigma_hi() } else { noise.sigma().sigma_lo() },
        )
    }
}

/// The `(mu_i, sigma_i)` the policy assigns to sample `i`.
///
/// Assumes a policy already checked by [`ScenarioPolicy::validate`].
pub fn noise_params_at(
    policy: &ScenarioPolicy,
    noise: &NoiseModel,
    seed: RngSeed,
    index: u64,
) -> (f64, f64) {
    match policy {
        ScenarioPolicy::Fixed { mu, sigma } => (*mu, *sigma),
        ScenarioPolicy::IidUniformBox => {
            let mut rng = stream_rng(seed, STREAM_PARAM, index);
            let u_mu: f64 = rng.random();
            let u_s: f64 = rng.random();
            (
                noise.mean().lo() + u_mu * noise.mean().width(),
                noise.sigma().sigma_lo()
                    + u_s * (noise.sigma().sigma_hi() - noise.sigma().sigma_lo()),
            )
        }
        ScenarioPolicy::TwoPointSwitch { p } => {
            let mut rng = stream_rng(seed, STREAM_PARAM, index);
            let hi = rng.random::<f64>() < *p;
            ScenarioPolicy::corner(noise, hi, hi)
        }
        ScenarioPolicy::BlockSwitch { block_len } => {
            let mut rng = stream_rng(seed, STREAM_BLOCK, index / block_len);
            let mean_hi = rng.random::<bool>();
            let sigma_hi = rng.random::<bool>();
            ScenarioPolicy::corner(noise, mean_hi, sigma_hi)
        }
        ScenarioPolicy::Custom { schedule } => schedule[index as usize],
    }
}

/// Noise sample `i` of the scenario: `mu_i + sigma_i * N(0, 1)`.
pub fn noise_sample_at(
    policy: &ScenarioPolicy,
    noise: &NoiseModel,
    seed: RngSeed,
    index: u64,
) -> f64 {
    let (mu, sigma) = noise_params_at(policy, noise, seed, index);
    debug_assert!(
        noise.mean().contains(mu)
            && sigma >= noise.sigma().sigma_lo()
            && sigma <= noise.sigma().sigma_hi(),
        "scenario parameters escaped the box"
    );
    let z: f64 = stream_rng(seed, STREAM_NOISE, index).sample(StandardNormal);
    mu + sigma * z
}

/// Generates `n` scenario noise samples.
pub fn generate_noise(
    policy: &ScenarioPolicy,
    noise: &NoiseModel,
    n: u64,
    seed: RngSeed,
) -> Result<Vec<f64>, ScenarioError> {
    policy.validate(noise, n)?;
    Ok((0..n).map(|i| noise_sample_at(policy, noise, seed, i)).collect())
}

/// Fading gain `i`: circularly-symmetric complex Gaussian with unit total
/// variance, so `|H|^2` is unit-mean exponential and `|H|` Rayleigh.
pub fn rayleigh_gain_at(seed: RngSeed, index: u64) -> Complex64 {
    let mut rng = stream_rng(seed, STREAM_GAIN, index);
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * std::f64::consts::FRAC_1_SQRT_2, im * std::f64::consts::FRAC_1_SQRT_2)
}

/// Generates `n` i.i.d. Rayleigh fading gains.
pub fn generate_rayleigh_gains(n: u64, seed: RngSeed) -> Vec<Complex64> {
    (0..n).map(|i| rayleigh_gain_at(seed, i)).collect()
}
