//! Detection toolkit for binary-input additive noise channels whose noise law
//! is uncertain: the mean is only known to lie in an interval `[mu_lo, mu_hi]`
//! and the standard deviation in `[sigma_lo, sigma_hi]`.
//!
//! Under sublinear expectation the noise is modelled as the sum of a maximal
//! distribution (mean uncertainty) and a G-normal distribution (variance
//! uncertainty). Every event probability then becomes an interval, and the
//! crate computes those intervals in closed form:
//!
//! * [`kernel`] — Gaussian tail `Q` and the semi-G-normal upper/lower CDF
//!   kernels that every envelope reduces to.
//! * [`channel`] — channel output probability envelopes and SNR bounds.
//! * [`detector`] — the robust optimal threshold, its existence condition and
//!   error-probability envelopes.
//! * [`estimation`] — sliding-window estimation of the uncertainty intervals
//!   from channel I/O data.
//! * [`scenario`] — classical noise generators living inside the uncertainty
//!   box, used to validate the envelopes empirically.
//! * [`fading`] — Rayleigh-fading reductions: sufficient statistic, noise
//!   rotation and fading-averaged error envelopes.
//! * [`experiment`] — the Monte Carlo engine producing SNR sweep tables.

pub mod channel;
pub mod detector;
pub mod estimation;
pub mod experiment;
pub mod fading;
pub mod kernel;
pub mod rng;
pub mod scenario;

pub use channel::{
    awgn_equivalent_sigma, awgn_error_probability, output_cdf_envelope, output_tail_envelope,
    snr_bounds, ChannelError, Constellation, NoiseModel, ProbabilityEnvelope, SnrBounds,
    UncertaintyInterval,
};
pub use detector::{
    error_envelope, error_envelope_at_threshold, min_distance_error_envelope, optimal_threshold,
    DetectorError, ErrorEnvelope, ThresholdDetector,
};
pub use estimation::{
    estimate_all, estimate_mean_interval, estimate_sigma_interval, phi_max_mean_variance,
    residual_lower, residual_upper, EstimationError, EstimationResult, IoSample, SigmaSolve,
};
pub use experiment::{
    binomial_ci_half_width, compare_detectors, fading_sweep, run_trials, sweep_error_curves,
    within_envelope, DetectorChoice, DetectorComparisonRow, ExperimentConfig, ExperimentError,
    RunOptions, SweepRow, TrialStats,
};
pub use fading::{
    averaged_error_envelope, conditional_error_envelope, rotate_gdistributed, rotate_gnormal_box,
    sufficient_statistic, ComplexGain, ComplexNoiseModel, FadingError,
};
pub use kernel::{q_function, semi_g_lower_cdf, semi_g_upper_cdf, KernelError, SigmaBox};
pub use rng::RngSeed;
pub use scenario::{
    generate_noise, generate_rayleigh_gains, noise_params_at, noise_sample_at, rayleigh_gain_at,
    ScenarioError, ScenarioPolicy,
};
