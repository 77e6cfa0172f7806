//! Monte Carlo engine: single-point trial runs, SNR sweeps of the
//! theoretical envelopes with empirical overlays, paired detector
//! comparisons, and fading sweeps.
//!
//! SNR sweeps scale the symbol distance (around the configured constellation
//! midpoint) with the noise box held fixed, so one config traces a whole
//! curve. Trials are partitioned across worker threads by index range; all
//! draws are per-index counter-based, and reductions are integer error-count
//! sums, so results are identical for every thread count.

use crate::channel::{
    awgn_error_probability, Constellation, NoiseModel, ProbabilityEnvelope,
};
use crate::detector::{error_envelope_at_threshold, optimal_threshold, DetectorError};
use crate::fading::averaged_error_envelope;
use crate::rng::{derive_seed, stream_rng, RngSeed};
use crate::scenario::{
    noise_params_at, noise_sample_at, rayleigh_gain_at, ScenarioError, ScenarioPolicy,
    STREAM_NOISE,
};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};
use thiserror::Error;

pub(crate) const STREAM_SYMBOL: u64 = 4;
pub(crate) const STREAM_NOISE_IM: u64 = 6;
const ROW_SALT: u64 = 0x524f_57;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Which threshold rule the empirical runs apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorChoice {
    Optimal,
    MinDistance,
    Custom { threshold: f64 },
}

/// One experiment: channel, scenario, detector, trial budget and sweep grid.
///
/// `trials == 0` asks for theory-only sweep rows (no empirical column).
/// Thread count is deliberately *not* part of the config: it can never change
/// results, only speed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub constellation: Constellation,
    pub noise: NoiseModel,
    pub policy: ScenarioPolicy,
    pub detector: DetectorChoice,
    pub trials: u64,
    pub seed: RngSeed,
    #[serde(default)]
    pub snr_grid_db: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
}

/// Execution knobs that must not affect results.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub threads: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { threads: 1 }
    }
}

/// Outcome of a single-point Monte Carlo run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrialStats {
    pub errors: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_half_width: f64,
}

/// One row of an SNR sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub pe_upper_theory: f64,
    pub pe_lower_theory: f64,
    pub pe_awgn_theory: f64,
    pub pe_empirical: Option<f64>,
    pub ci_half_width: Option<f64>,
    pub trials: u64,
}

/// One row of a paired optimal-vs-minimum-distance comparison.
#[derive(Debug, Clone, Serialize)]
pub struct DetectorComparisonRow {
    pub snr_db: f64,
    pub pe_optimal: f64,
    pub ci_optimal: f64,
    pub pe_min_distance: f64,
    pub ci_min_distance: f64,
    pub trials: u64,
}

/// 99% two-sided binomial confidence half-width: exact Clopper-Pearson below
/// 1000 trials, normal approximation with continuity correction above.
pub fn binomial_ci_half_width(errors: u64, trials: u64) -> f64 {
    assert!(errors <= trials && trials > 0);
    let n = trials as f64;
    if trials < 1000 {
        let k = errors as f64;
        let lower = if errors == 0 {
            0.0
        } else {
            Beta::new(k, n - k + 1.0).expect("valid shapes").inverse_cdf(0.005)
        };
        let upper = if errors == trials {
            1.0
        } else {
            Beta::new(k + 1.0, n - k).expect("valid shapes").inverse_cdf(0.995)
        };
        0.5 * (upper - lower)
    } else {
        let z = 2.5758293035489004_f64;
        let p = errors as f64 / n;
        z * (p * (1.0 - p) / n).sqrt() + 0.5 / n
    }
}

fn trial_stats(errors: u64, trials: u64) -> TrialStats {
    TrialStats {
        errors,
        trials,
        rate: errors as f64 / trials as f64,
        ci_half_width: binomial_ci_half_width(errors, trials),
    }
}

fn resolve_threshold(
    choice: &DetectorChoice,
    c: &Constellation,
    noise: &NoiseModel,
) -> Result<f64, ExperimentError> {
    match choice {
        DetectorChoice::Optimal => Ok(optimal_threshold(c, noise)?.threshold()),
        DetectorChoice::MinDistance => Ok(c.midpoint()),
        DetectorChoice::Custom { threshold } => {
            if !threshold.is_finite() {
                return Err(ExperimentError::Config(format!(
                    "custom threshold {threshold} is not finite"
                )));
            }
            Ok(*threshold)
        }
    }
}

fn symbol_at(c: &Constellation, seed: RngSeed, index: u64) -> f64 {
    if stream_rng(seed, STREAM_SYMBOL, index).random::<bool>() {
        c.x_a()
    } else {
        c.x_b()
    }
}

fn split_ranges(n: u64, threads: usize) -> Vec<(u64, u64)> {
    let workers = threads.max(1) as u64;
    let workers = workers.min(n.max(1));
    let chunk = n.div_ceil(workers);
    (0..workers)
        .map(|w| (w * chunk, ((w + 1) * chunk).min(n)))
        .filter(|(a, b)| a < b)
        .collect()
}

/// Error counts for several thresholds over the *same* noise realizations.
fn simulate_errors(
    c: &Constellation,
    noise: &NoiseModel,
    policy: &ScenarioPolicy,
    thresholds: &[f64],
    n: u64,
    seed: RngSeed,
    threads: usize,
) -> Vec<u64> {
    let ranges = split_ranges(n, threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .iter()
            .map(|&(start, end)| {
                scope.spawn(move || {
                    let mut errors = vec![0u64; thresholds.len()];
                    for i in start..end {
                        let x = symbol_at(c, seed, i);
                        let y = x + noise_sample_at(policy, noise, seed, i);
                        for (t, e) in thresholds.iter().zip(errors.iter_mut()) {
                            let decided = if y > *t { c.x_a() } else { c.x_b() };
                            if decided != x {
                                *e += 1;
                            }
                        }
                    }
                    errors
                })
            })
            .collect();
        let mut totals = vec![0u64; thresholds.len()];
        for h in handles {
            for (t, v) in totals.iter_mut().zip(h.join().expect("worker panicked")) {
                *t += v;
            }
        }
        totals
    })
}

/// Sufficient-statistic detection over Rayleigh gains and scenario noise.
///
/// Draws the real noise part from the same stream as the non-fading path, so
/// forcing unit gains reproduces a non-fading run exactly.
fn simulate_fading_errors<G>(
    c: &Constellation,
    noise: &NoiseModel,
    policy: &ScenarioPolicy,
    gain_at: G,
    n: u64,
    seed: RngSeed,
    threads: usize,
) -> u64
where
    G: Fn(RngSeed, u64) -> num_complex::Complex64 + Sync,
{
    let ranges = split_ranges(n, threads);
    let gain_at = &gain_at;
    std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .iter()
            .map(|&(start, end)| {
                scope.spawn(move || {
                    let mut errors = 0u64;
                    for i in start..end {
                        let x = symbol_at(c, seed, i);
                        let h = gain_at(seed, i);
                        let (mu, sigma) = noise_params_at(policy, noise, seed, i);
                        let z_re: f64 =
                            mu + sigma * stream_rng(seed, STREAM_NOISE, i).sample::<f64, _>(StandardNormal);
                        let z_im: f64 = mu
                            + sigma
                                * stream_rng(seed, STREAM_NOISE_IM, i).sample::<f64, _>(StandardNormal);
                        let y_re = h.re * x + z_re;
                        let y_im = h.im * x + z_im;
                        let mag = h.norm();
                        // |h| = 0 has probability zero; treat as an erasure decided x_b
                        let decided = if mag > 0.0 {
                            let s = (h.re * y_re + h.im * y_im) / mag;
                            if s > mag * c.midpoint() { c.x_a() } else { c.x_b() }
                        } else {
                            c.x_b()
                        };
                        if decided != x {
                            errors += 1;
                        }
                    }
                    errors
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).sum()
    })
}

/// Symbol distance hitting the target midpoint SNR with the noise box fixed.
fn distance_for_snr(noise: &NoiseModel, snr: f64) -> Result<f64, ExperimentError> {
    if !(snr.is_finite() && snr > 0.0) {
        return Err(ExperimentError::Config(format!("target SNR {snr} must be positive")));
    }
    let w = noise.mean().width();
    let s_lo = noise.sigma().sigma_lo();
    let s_hi = noise.sigma().sigma_hi();
    // Below the width threshold the lower SNR bound is zero and the midpoint
    // SNR is (d+w)^2/(16*s_lo^2); above it, solve the full quadratic.
    let d_low = 4.0 * s_lo * snr.sqrt() - w;
    if d_low < 0.0 {
        return Err(ExperimentError::Config(format!(
            "target SNR {snr} is below the reachable range for mean width {w}"
        )));
    }
    if d_low <= w {
        return Ok(d_low);
    }
    let a = s_lo * s_lo + s_hi * s_hi;
    let b = 2.0 * w * (s_hi * s_hi - s_lo * s_lo);
    let c = w * w * a - 16.0 * snr * s_hi * s_hi * s_lo * s_lo;
    let disc = b * b - 4.0 * a * c;
    debug_assert!(disc >= 0.0);
    Ok((-b + disc.sqrt()) / (2.0 * a))
}

fn constellation_for_snr(
    base: &Constellation,
    noise: &NoiseModel,
    snr: f64,
) -> Result<Constellation, ExperimentError> {
    let d = distance_for_snr(noise, snr)?;
    let mid = base.midpoint();
    Constellation::new(mid + 0.5 * d, mid - 0.5 * d)
        .map_err(|e| ExperimentError::Config(e.to_string()))
}

fn check_grid(grid: &[f64]) -> Result<(), ExperimentError> {
    if grid.is_empty() {
        return Err(ExperimentError::Config("SNR sweep grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) || grid.iter().any(|v| !v.is_finite()) {
        return Err(ExperimentError::Config("SNR sweep grid must be finite and sorted".into()));
    }
    Ok(())
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Transmits `cfg.trials` equiprobable symbols through the scenario noise and
/// applies the configured detector at the configured constellation.
pub fn run_trials(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<TrialStats, ExperimentError> {
    if cfg.trials == 0 {
        return Err(ExperimentError::Config("trials must be >= 1".into()));
    }
    cfg.policy.validate(&cfg.noise, cfg.trials)?;
    let threshold = resolve_threshold(&cfg.detector, &cfg.constellation, &cfg.noise)?;
    let errors = simulate_errors(
        &cfg.constellation,
        &cfg.noise,
        &cfg.policy,
        &[threshold],
        cfg.trials,
        cfg.seed,
        opts.threads,
    )[0];
    Ok(trial_stats(errors, cfg.trials))
}

/// Theoretical envelope curves over the SNR grid (for the configured
/// detector's threshold), the classical AWGN reference, and optionally the
/// empirical rate at each point.
pub fn sweep_error_curves(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<Vec<SweepRow>, ExperimentError> {
    check_grid(&cfg.snr_grid_db)?;
    if cfg.trials > 0 {
        cfg.policy.validate(&cfg.noise, cfg.trials)?;
    }
    let mut rows = Vec::with_capacity(cfg.snr_grid_db.len());
    for (row, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
        let snr = db_to_linear(snr_db);
        let scaled = constellation_for_snr(&cfg.constellation, &cfg.noise, snr)?;
        let threshold = resolve_threshold(&cfg.detector, &scaled, &cfg.noise)?;
        let env = error_envelope_at_threshold(threshold, &scaled, &cfg.noise);
        let (pe_empirical, ci_half_width) = if cfg.trials > 0 {
            let seed = derive_seed(cfg.seed, ROW_SALT, row as u64);
            let errors = simulate_errors(
                &scaled,
                &cfg.noise,
                &cfg.policy,
                &[threshold],
                cfg.trials,
                seed,
                opts.threads,
            )[0];
            let st = trial_stats(errors, cfg.trials);
            (Some(st.rate), Some(st.ci_half_width))
        } else {
            (None, None)
        };
        rows.push(SweepRow {
            snr_db,
            pe_upper_theory: env.pe_upper(),
            pe_lower_theory: env.pe_lower(),
            pe_awgn_theory: awgn_error_probability(snr),
            pe_empirical,
            ci_half_width,
            trials: cfg.trials,
        });
    }
    Ok(rows)
}

/// Runs the optimal and the minimum-distance detector on identical noise
/// realizations at every SNR point, so rate differences are attributable to
/// the thresholds alone.
pub fn compare_detectors(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<Vec<DetectorComparisonRow>, ExperimentError> {
    check_grid(&cfg.snr_grid_db)?;
    if cfg.trials == 0 {
        return Err(ExperimentError::Config("detector comparison needs trials >= 1".into()));
    }
    cfg.policy.validate(&cfg.noise, cfg.trials)?;
    let mut rows = Vec::with_capacity(cfg.snr_grid_db.len());
    for (row, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
        let snr = db_to_linear(snr_db);
        let scaled = constellation_for_snr(&cfg.constellation, &cfg.noise, snr)?;
        let optimal = optimal_threshold(&scaled, &cfg.noise)?.threshold();
        let thresholds = [optimal, scaled.midpoint()];
        let seed = derive_seed(cfg.seed, ROW_SALT, row as u64);
        let errors = simulate_errors(
            &scaled,
            &cfg.noise,
            &cfg.policy,
            &thresholds,
            cfg.trials,
            seed,
            opts.threads,
        );
        let opt = trial_stats(errors[0], cfg.trials);
        let md = trial_stats(errors[1], cfg.trials);
        rows.push(DetectorComparisonRow {
            snr_db,
            pe_optimal: opt.rate,
            ci_optimal: opt.ci_half_width,
            pe_min_distance: md.rate,
            ci_min_distance: md.ci_half_width,
            trials: cfg.trials,
        });
    }
    Ok(rows)
}

/// Monte Carlo over Rayleigh gains with per-gain sufficient-statistic
/// detection, against the fading-averaged theoretical envelope.
///
/// Requires zero-mean noise (no mean uncertainty), matching the regime in
/// which the sufficient-statistic reduction is exact.
pub fn fading_sweep(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<Vec<SweepRow>, ExperimentError> {
    check_grid(&cfg.snr_grid_db)?;
    if !(cfg.noise.mean().is_degenerate() && cfg.noise.mean().lo() == 0.0) {
        return Err(ExperimentError::Config(
            "fading sweep requires zero-mean noise (mean interval [0, 0])".into(),
        ));
    }
    if cfg.trials > 0 {
        cfg.policy.validate(&cfg.noise, cfg.trials)?;
    }
    let mut rows = Vec::with_capacity(cfg.snr_grid_db.len());
    for (row, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
        let snr = db_to_linear(snr_db);
        let scaled = constellation_for_snr(&cfg.constellation, &cfg.noise, snr)?;
        let env = averaged_error_envelope(&scaled, cfg.noise.sigma());
        let classical = 0.5 * (1.0 - (snr / (1.0 + snr)).sqrt());
        let (pe_empirical, ci_half_width) = if cfg.trials > 0 {
            let seed = derive_seed(cfg.seed, ROW_SALT, row as u64);
            let errors = simulate_fading_errors(
                &scaled,
                &cfg.noise,
                &cfg.policy,
                |s, i| rayleigh_gain_at(s, i),
                cfg.trials,
                seed,
                opts.threads,
            );
            let st = trial_stats(errors, cfg.trials);
            (Some(st.rate), Some(st.ci_half_width))
        } else {
            (None, None)
        };
        rows.push(SweepRow {
            snr_db,
            pe_upper_theory: env.pe_upper(),
            pe_lower_theory: env.pe_lower(),
            pe_awgn_theory: classical,
            pe_empirical,
            ci_half_width,
            trials: cfg.trials,
        });
    }
    Ok(rows)
}

/// Containment band check used by sweep validations: `value` within the
/// envelope widened by `slack` on each side.
pub fn within_envelope(value: f64, env: &ProbabilityEnvelope, slack: f64) -> bool {
    value >= env.lower() - slack && value <= env.upper() + slack
}
