//! Rayleigh-fading reductions.
//!
//! With channel state known at the receiver, detection over `Y' = H*X + Z'`
//! reduces to a real channel through the sufficient statistic
//! `S' = Re((H/|H|)* Y')`. The rotated noise keeps the G-normal family
//! (sigma box scaled by `|h|`) provided the real and imaginary noise parts
//! are independent; that hypothesis is a declared property of the model, not
//! something the data can prove, so operations that rely on it refuse to run
//! unless the caller has declared it.

use crate::channel::{Constellation, NoiseModel, UncertaintyInterval};
use crate::detector::ErrorEnvelope;
use crate::kernel::{q, SigmaBox};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FadingError {
    #[error("operation requires |h| > 0")]
    ZeroGain,
    #[error("non-finite gain ({re}, {im})")]
    NonFiniteGain { re: f64, im: f64 },
    #[error("real and imaginary noise components must share the same uncertainty boxes")]
    MismatchedComponents,
    #[error("model does not declare the real/imaginary noise parts independent")]
    IndependenceNotDeclared,
}

/// Complex channel gain `h = h_re + i*h_im`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexGain {
    re: f64,
    im: f64,
}

impl ComplexGain {
    pub fn new(re: f64, im: f64) -> Result<Self, FadingError> {
        if !(re.is_finite() && im.is_finite()) {
            return Err(FadingError::NonFiniteGain { re, im });
        }
        Ok(Self { re, im })
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn magnitude(&self) -> f64 {
        self.re.hypot(self.im)
    }

    fn parts(&self) -> (f64, f64, f64, f64) {
        (self.re.max(0.0), (-self.re).max(0.0), self.im.max(0.0), (-self.im).max(0.0))
    }
}

impl TryFrom<Complex64> for ComplexGain {
    type Error = FadingError;
    fn try_from(z: Complex64) -> Result<Self, FadingError> {
        Self::new(z.re, z.im)
    }
}

/// Complex uncertain noise: one [`NoiseModel`] per component, plus the
/// declaration that the components are independent under the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexNoiseModel {
    re: NoiseModel,
    im: NoiseModel,
    independent_parts: bool,
}

impl ComplexNoiseModel {
    pub fn new(re: NoiseModel, im: NoiseModel, independent_parts: bool) -> Self {
        Self { re, im, independent_parts }
    }

    pub fn re(&self) -> &NoiseModel {
        &self.re
    }

    pub fn im(&self) -> &NoiseModel {
        &self.im
    }

    pub fn independent_parts(&self) -> bool {
        self.independent_parts
    }
}

/// `S' = Re((h/|h|)* y')`, the real sufficient statistic for detection.
pub fn sufficient_statistic(h: &ComplexGain, y_prime: Complex64) -> Result<f64, FadingError> {
    let mag = h.magnitude();
    if mag == 0.0 {
        return Err(FadingError::ZeroGain);
    }
    Ok((h.re * y_prime.re + h.im * y_prime.im) / mag)
}

/// Sigma box of the rotated G-normal noise: `[|h|*lo, |h|*hi]`.
pub fn rotate_gnormal_box(h: &ComplexGain, sigma: &SigmaBox) -> Result<SigmaBox, FadingError> {
    let mag = h.magnitude();
    if mag == 0.0 {
        return Err(FadingError::ZeroGain);
    }
    sigma.scaled(mag).map_err(|_| FadingError::ZeroGain)
}

/// Distribution of `h * Z'` for a complex uncertain noise with both mean and
/// variance uncertainty.
///
/// The component mean intervals rotate through the positive/negative parts of
/// `h`; both sigma boxes scale by `|h|`. Requires identical component boxes
/// and the declared independence of the parts.
pub fn rotate_gdistributed(
    h: &ComplexGain,
    z: &ComplexNoiseModel,
) -> Result<ComplexNoiseModel, FadingError> {
    if !z.independent_parts {
        return Err(FadingError::IndependenceNotDeclared);
    }
    if z.re.mean() != z.im.mean() || z.re.sigma() != z.im.sigma() {
        return Err(FadingError::MismatchedComponents);
    }
    let mag = h.magnitude();
    if mag == 0.0 {
        return Err(FadingError::ZeroGain);
    }
    let (h1p, h1n, h2p, h2n) = h.parts();
    let mu_lo = z.re.mean().lo();
    let mu_hi = z.re.mean().hi();
    let re_mean = UncertaintyInterval::new(
        mu_lo * (h1p + h2n) - mu_hi * (h1n + h2p),
        mu_hi * (h1p + h2n) - mu_lo * (h1n + h2p),
    )
    .expect("rotated interval is ordered");
    let im_mean = UncertaintyInterval::new(
        mu_lo * (h1p + h2p) - mu_hi * (h1n + h2n),
        mu_hi * (h1p + h2p) - mu_lo * (h1n + h2n),
    )
    .expect("rotated interval is ordered");
    let sigma = rotate_gnormal_box(h, z.re.sigma())?;
    Ok(ComplexNoiseModel::new(
        NoiseModel::new(re_mean, sigma),
        NoiseModel::new(im_mean, sigma),
        true,
    ))
}

/// Error envelope of sufficient-statistic detection conditioned on `H = h`,
/// for zero-mean noise with variance uncertainty only.
pub fn conditional_error_envelope(
    h: &ComplexGain,
    c: &Constellation,
    sigma: &SigmaBox,
) -> Result<ErrorEnvelope, FadingError> {
    let mag = h.magnitude();
    if mag == 0.0 {
        return Err(FadingError::ZeroGain);
    }
    let d = c.distance();
    let s_lo = sigma.sigma_lo();
    let s_hi = sigma.sigma_hi();
    let denom = s_hi + s_lo;
    Ok(ErrorEnvelope::from_bounds(
        (2.0 * s_lo / denom) * q(mag * d / (2.0 * s_lo)),
        (2.0 * s_hi / denom) * q(mag * d / (2.0 * s_hi)),
    ))
}

/// Error envelope averaged over Rayleigh fading `H ~ CN(0, 1)`:
/// the closed form of the `|H|`-integral of [`conditional_error_envelope`].
pub fn averaged_error_envelope(c: &Constellation, sigma: &SigmaBox) -> ErrorEnvelope {
    let d2 = c.distance() * c.distance();
    let s_lo = sigma.sigma_lo();
    let s_hi = sigma.sigma_hi();
    let denom = s_hi + s_lo;
    let upper = (s_hi / denom) * (1.0 - (d2 / (d2 + 8.0 * s_hi * s_hi)).sqrt());
    let lower = (s_lo / denom) * (1.0 - (d2 / (d2 + 8.0 * s_lo * s_lo)).sqrt());
    ErrorEnvelope::from_bounds(lower, upper)
}
