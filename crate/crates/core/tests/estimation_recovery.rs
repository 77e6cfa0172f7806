//! Estimation pipeline on simulated channels with known uncertainty boxes.

mod common;

use agdn_core::rng::{stream_rng, RngSeed};
use agdn_core::{
    estimate_all, estimate_mean_interval, estimate_sigma_interval, noise_sample_at,
    phi_max_mean_variance, residual_lower, residual_upper, Constellation, EstimationError,
    IoSample, ScenarioPolicy, UncertaintyInterval,
};
use common::*;
use rand::Rng;

const N: u64 = 100_000;
const WINDOW: usize = 1_000;

fn channel_samples(
    c: &Constellation,
    nm: &agdn_core::NoiseModel,
    policy: &ScenarioPolicy,
    n: u64,
    seed: RngSeed,
) -> Vec<IoSample> {
    policy.validate(nm, n).unwrap();
    (0..n)
        .map(|i| {
            let x = if stream_rng(seed, 4, i).random::<bool>() { c.x_a() } else { c.x_b() };
            IoSample::new(x, x + noise_sample_at(policy, nm, seed, i))
        })
        .collect()
}

// Mean recovery from block data switching between the two mean extremes.
// Sigma is held small and degenerate so the window-max bias (which scales
// with sigma/sqrt(m)) stays inside the +-0.02 target.
#[test]
fn mean_interval_recovery_from_block_switching() {
    let nm = noise(-0.1, 0.2, 0.1, 0.1);
    let policy = ScenarioPolicy::BlockSwitch { block_len: WINDOW as u64 };
    let c = constellation(1.0, -1.0);
    let samples = channel_samples(&c, &nm, &policy, N, RngSeed(31));
    let mean_hat = estimate_mean_interval(&samples, WINDOW).unwrap();
    assert!((mean_hat.lo() - (-0.1)).abs() <= 0.02, "lo endpoint {}", mean_hat.lo());
    assert!((mean_hat.hi() - 0.2).abs() <= 0.02, "hi endpoint {}", mean_hat.hi());
}

#[test]
fn mean_interval_recovery_near_figure_interval() {
    let nm = noise(-0.003, 0.067, 0.1, 0.1);
    let policy = ScenarioPolicy::BlockSwitch { block_len: WINDOW as u64 };
    let c = constellation(1.0, -1.0);
    let samples = channel_samples(&c, &nm, &policy, N, RngSeed(32));
    let mean_hat = estimate_mean_interval(&samples, WINDOW).unwrap();
    assert!((mean_hat.lo() - (-0.003)).abs() <= 0.02);
    assert!((mean_hat.hi() - 0.067).abs() <= 0.02);
}

// Residuals evaluated at the true parameters: for a degenerate box the
// windows do realize the kernel values and the residuals sit within the
// window-count statistics band. For a genuinely uncertain box the kernels
// strictly exceed what any per-sample classical mixture attains, so the
// upper residual at the truth is systematically negative: the envelopes of
// the uncertainty family are wider than its classical members.
#[test]
fn residuals_at_true_parameters_degenerate_within_statistics() {
    let sigma = 1.2;
    let nm = noise(0.0, 0.0, sigma, sigma);
    let policy = ScenarioPolicy::Fixed { mu: 0.0, sigma };
    let c = constellation(1.0, -1.0);
    let samples = channel_samples(&c, &nm, &policy, N, RngSeed(33));
    let mean_hat = UncertaintyInterval::new(0.0, 0.0).unwrap();
    // window means of indicators have sd ~ 1/(2*sqrt(m)); the extreme over
    // ~n/m effective windows stays within ~3 sds at m = 1e4
    let m = 10_000;
    let up = residual_upper(nm.sigma(), &mean_hat, 0.0, &samples, m).unwrap();
    let lo = residual_lower(nm.sigma(), &mean_hat, 0.0, &samples, m).unwrap();
    assert!(up.abs() <= 0.02, "upper residual {up}");
    assert!(lo.abs() <= 0.02, "lower residual {lo}");
}

#[test]
fn residual_at_true_box_is_negative_under_switching() {
    let nm = noise(0.0, 0.0, 0.8, 1.6);
    let policy = ScenarioPolicy::TwoPointSwitch { p: 0.5 };
    let c = constellation(1.0, -1.0);
    let samples = channel_samples(&c, &nm, &policy, N, RngSeed(33));
    let mean_hat = UncertaintyInterval::new(0.0, 0.0).unwrap();
    let up = residual_upper(nm.sigma(), &mean_hat, 0.0, &samples, WINDOW).unwrap();
    assert!(up <= -0.02, "expected a strict attainment gap, got {up}");
}

#[test]
fn residual_turns_negative_as_sigma_hi_grows() {
    let nm = noise(0.0, 0.0, 0.8, 1.6);
    let policy = ScenarioPolicy::TwoPointSwitch { p: 0.5 };
    let c = constellation(1.0, -1.0);
    let samples = channel_samples(&c, &nm, &policy, 20_000, RngSeed(34));
    let mean_hat = UncertaintyInterval::new(0.0, 0.0).unwrap();
    let mut prev = f64::INFINITY;
    for hi in [1.0, 2.0, 4.0, 8.0, 16.0] {
        let sb = sigma_box(0.8, hi);
        let r = residual_upper(&sb, &mean_hat, 0.0, &samples, WINDOW).unwrap();
        assert!(r < prev, "residual not decreasing in sigma_hi at {hi}");
        prev = r;
    }
    assert!(prev < 0.0, "residual should eventually go negative, got {prev}");
}

// The two residual equations are mirror images around the estimated
// threshold (their kernel arguments are exact negatives of each other), so
// for balanced symbol streams they constrain the sigma box only through one
// scalar combination: the root is a manifold, not a point, and the reported
// box is the deterministic proximity-anchored iterate. The test pins the
// contract — an acceptable deterministic root — not point recovery.
#[test]
fn sigma_solve_reports_a_deterministic_acceptable_root() {
    let nm = noise(0.0, 0.0, 0.8, 1.6);
    let policy = ScenarioPolicy::TwoPointSwitch { p: 0.5 };
    let c = constellation(1.0, -1.0);
    let samples = channel_samples(&c, &nm, &policy, N, RngSeed(35));
    let a = estimate_all(&samples, WINDOW, &c).unwrap();
    let b = estimate_all(&samples, WINDOW, &c).unwrap();
    assert_eq!(a.sigma_hat, b.sigma_hat);
    assert_eq!(a.solver_iterations, b.solver_iterations);
    assert!(a.residual_norm <= 1e-2);
    // the anchored root stays at the scale of the pooled dispersion
    let pooled = ((0.8f64 * 0.8 + 1.6 * 1.6) / 2.0).sqrt();
    assert!(a.sigma_hat.sigma_lo() > 0.3 * pooled && a.sigma_hat.sigma_hi() < 2.0 * pooled);
    // residuals evaluated at the reported box agree with the reported norm
    let up = residual_upper(&a.sigma_hat, &a.mean_hat, a.threshold_hat, &samples, WINDOW).unwrap();
    let lo = residual_lower(&a.sigma_hat, &a.mean_hat, a.threshold_hat, &samples, WINDOW).unwrap();
    assert!((up.abs().max(lo.abs()) - a.residual_norm).abs() <= 1e-12);
}

// In the saturated regime (sigma well below the symbol distance) the
// pipeline recovers the classical picture: tight mean interval, near-zero
// threshold, near-zero error envelope matching Q(d/2sigma) absolutely, and
// the moment-anchored sigma_lo at the sample dispersion.
#[test]
fn degenerate_gaussian_estimates_collapse_to_classical() {
    let sigma = 0.25;
    let nm = noise(0.0, 0.0, sigma, sigma);
    let policy = ScenarioPolicy::Fixed { mu: 0.0, sigma };
    let c = constellation(1.0, -1.0);
    let samples = channel_samples(&c, &nm, &policy, N, RngSeed(36));
    let result = estimate_all(&samples, WINDOW, &c).unwrap();
    assert!(result.mean_hat.lo().abs() <= 0.03 && result.mean_hat.hi().abs() <= 0.03);
    assert!(result.threshold_hat.abs() <= 0.03);
    assert!((result.sigma_hat.sigma_lo() - sigma).abs() / sigma <= 0.10);
    assert!(result.sigma_hat.sigma_hi() <= 0.4);
    let classical = agdn_core::q_function(1.0 / sigma).unwrap();
    assert!((result.error_envelope_hat.pe_upper() - classical).abs() <= 5e-3);
    assert!((result.error_envelope_hat.pe_lower() - classical).abs() <= 5e-3);
    assert!(result.residual_norm <= 1e-2);
}

#[test]
fn sigma_solve_with_estimated_mean_interval() {
    // full pipeline sanity: mean estimated first, then the solve at y0_hat
    let nm = noise(-0.05, 0.1, 0.9, 1.3);
    let policy = ScenarioPolicy::BlockSwitch { block_len: WINDOW as u64 };
    let c = constellation(1.0, -1.0);
    let samples = channel_samples(&c, &nm, &policy, N, RngSeed(37));
    let mean_hat = estimate_mean_interval(&samples, WINDOW).unwrap();
    let y0 = 0.5 * (c.x_a() + c.x_b() + mean_hat.lo() + mean_hat.hi());
    let solve = estimate_sigma_interval(&samples, WINDOW, &mean_hat, y0).unwrap();
    assert!(solve.residual_norm <= 1e-2);
    assert!(solve.sigma.sigma_lo() > 0.3 && solve.sigma.sigma_hi() < 2.5);
}

#[test]
fn phi_max_mean_recovers_sigma_box_from_pure_noise() {
    let nm = noise(0.0, 0.0, 1.0, 2.0);
    let policy = ScenarioPolicy::BlockSwitch { block_len: WINDOW as u64 };
    let noise_only: Vec<f64> =
        (0..N).map(|i| noise_sample_at(&policy, &nm, RngSeed(38), i)).collect();
    let sb = phi_max_mean_variance(&noise_only, WINDOW).unwrap();
    assert!((sb.sigma_lo() - 1.0).abs() / 1.0 <= 0.10, "sigma_lo {}", sb.sigma_lo());
    assert!((sb.sigma_hi() - 2.0).abs() / 2.0 <= 0.10, "sigma_hi {}", sb.sigma_hi());
}

// Window extremes are order statistics over window starts: permuting whole
// blocks (with the window dividing the block length) leaves the recovered
// interval essentially unchanged.
#[test]
fn block_permutation_leaves_mean_interval_stable() {
    let nm = noise(-0.1, 0.2, 0.1, 0.1);
    let policy = ScenarioPolicy::BlockSwitch { block_len: 2 * WINDOW as u64 };
    let c = constellation(1.0, -1.0);
    let samples = channel_samples(&c, &nm, &policy, 40_000, RngSeed(39));
    let base = estimate_mean_interval(&samples, WINDOW).unwrap();

    // reverse the order of the 2*WINDOW-long blocks
    let block = 2 * WINDOW;
    let mut permuted = Vec::with_capacity(samples.len());
    for chunk in samples.chunks(block).rev() {
        permuted.extend_from_slice(chunk);
    }
    let perm = estimate_mean_interval(&permuted, WINDOW).unwrap();
    assert!((base.lo() - perm.lo()).abs() <= 0.02);
    assert!((base.hi() - perm.hi()).abs() <= 0.02);
}

#[test]
fn constant_channel_data_fails_as_degenerate() {
    let c = constellation(1.0, -1.0);
    let samples: Vec<IoSample> = (0..1000)
        .map(|i| {
            let x = if i % 2 == 0 { 1.0 } else { -1.0 };
            IoSample::new(x, x + 0.05)
        })
        .collect();
    assert!(matches!(
        estimate_all(&samples, 10, &c),
        Err(EstimationError::DegenerateInput)
    ));
}
