//! Fitting a log-skew-normal to a lognormal sum.
//!
//! The shape `lambda` is the root of a single scalar equation: the squared
//! coefficient of variation of the LSKN, with its scale tied to `lambda` by
//! the lower-tail slope constraint `sqrt(1 + lambda^2) / omega = sqrt(sum sigma_i^-2)`,
//! must equal `d2 / m^2` of the sum. Location then follows from the mean.
//!
//! Two baselines are provided for comparison: Fenton-Wilkinson (lognormal
//! with matched mean and variance) and skew-normal moment matching of
//! `ln(Lambda)` from samples.

use serde::{Deserialize, Serialize};

use crate::dists::{LognormalComponent, SkewNormalParams};
use crate::error::{Error, Result};
use crate::roots;
use crate::slnmodel::{sln_log_moments, SlnSpec};
use crate::specfun::norm_cdf;

/// Upper end of the shape search interval.
pub const LAMBDA_MAX: f64 = 1e3;
/// Convergence threshold on `|cv2_residual|`.
pub const RESIDUAL_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 200;

/// Linear-domain mean and variance of a log-skew-normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsknMoments {
    pub xi: f64,
    pub varpi2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    LsknSlopeMatch,
    FentonWilkinson,
    LogDomainMom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub params: SkewNormalParams,
    pub lambda0: f64,
    pub residual: f64,
    pub iterations: usize,
    pub method: FitMethod,
}

#[derive(Serialize, Deserialize)]
struct FitResultJson {
    lambda: f64,
    epsilon: f64,
    omega: f64,
    beta: f64,
    lambda0: f64,
    residual: f64,
    iterations: usize,
    method: FitMethod,
}

impl FitResult {
    pub fn to_json(&self) -> String {
        let doc = FitResultJson {
            lambda: self.params.lambda,
            epsilon: self.params.epsilon,
            omega: self.params.omega,
            beta: self.params.beta(),
            lambda0: self.lambda0,
            residual: self.residual,
            iterations: self.iterations,
            method: self.method,
        };
        serde_json::to_string_pretty(&doc).expect("plain struct serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: FitResultJson = serde_json::from_str(s)?;
        Ok(Self {
            params: SkewNormalParams::new(doc.lambda, doc.epsilon, doc.omega)?,
            lambda0: doc.lambda0,
            residual: doc.residual,
            iterations: doc.iterations,
            method: doc.method,
        })
    }
}

/// `alpha_p = 2 e^{eps p + omega^2 p^2/2} Phi(beta omega p)`, so that
/// `xi = alpha_1` and `varpi2 = alpha_2 - alpha_1^2`.
pub fn lskn_moments(p: SkewNormalParams) -> Result<LsknMoments> {
    let (e, w, b) = (p.epsilon, p.omega, p.beta());
    let phi1 = norm_cdf(b * w);
    let xi = 2.0 * (e + 0.5 * w * w).exp() * phi1;
    let varpi2 = 2.0 * (2.0 * e + w * w).exp() * ((w * w).exp() * norm_cdf(2.0 * b * w) - 2.0 * phi1 * phi1);
    if !(xi.is_finite() && varpi2.is_finite()) {
        return Err(Error::Overflow(format!("log-skew-normal moments of {p:?} exceed f64 range")));
    }
    Ok(LsknMoments { xi, varpi2 })
}

/// `varpi2 / xi^2` of the LSKN whose scale satisfies the lower-tail slope
/// constraint for `inv_var_sum = sum sigma_i^{-2}`:
/// `e^{omega^2} Phi(2u) / (2 Phi(u)^2) - 1` with `u = lambda / sqrt(S)`,
/// `omega^2 = (1 + lambda^2) / S`.
fn constrained_cv2(lambda: f64, inv_var_sum: f64) -> f64 {
    let u = lambda / inv_var_sum.sqrt();
    let w2 = (1.0 + lambda * lambda) / inv_var_sum;
    let phi_u = norm_cdf(u);
    w2.exp() * norm_cdf(2.0 * u) / (2.0 * phi_u * phi_u) - 1.0
}

/// Mismatch in squared coefficient of variation between the slope-constrained
/// LSKN with shape `lambda` and the sum `s`. Zero at the fitted shape.
pub fn cv2_residual(lambda: f64, s: &SlnSpec) -> f64 {
    let target = sln_log_moments(s).cv2();
    constrained_cv2(lambda, s.inverse_variance_sum()) - target
}

/// Starting shape from matching the right-tail slope as well:
/// `sqrt(max sigma^2 * sum sigma^-2 - 1)`.
pub fn initial_lambda(s: &SlnSpec) -> f64 {
    let sm = s.max_sigma();
    (sm * sm * s.inverse_variance_sum() - 1.0).max(0.0).sqrt()
}

/// Scale and location for a given shape: `omega` from the lower-tail slope,
/// `epsilon` so that the LSKN mean equals `exp(ln_m)`.
fn params_for_shape(lambda: f64, inv_var_sum: f64, ln_m: f64) -> Result<SkewNormalParams> {
    let omega = ((1.0 + lambda * lambda) / inv_var_sum).sqrt();
    let beta = lambda / lambda.hypot(1.0);
    let epsilon = ln_m - 0.5 * omega * omega - (2.0 * norm_cdf(beta * omega)).ln();
    SkewNormalParams::new(lambda, epsilon, omega)
}

/// Fits an LSKN to `s` by matching mean, variance and the lower-tail slope.
pub fn fit_lskn(s: &SlnSpec) -> Result<FitResult> {
    let lambda0 = initial_lambda(s);
    if s.len() == 1 {
        let c = s.components()[0];
        return Ok(FitResult {
            params: SkewNormalParams::new(0.0, c.mu(), c.sigma())?,
            lambda0,
            residual: cv2_residual(0.0, s),
            iterations: 0,
            method: FitMethod::LsknSlopeMatch,
        });
    }

    let lm = sln_log_moments(s);
    let target = lm.cv2();
    if !target.is_finite() {
        return Err(Error::Overflow("coefficient of variation of the sum is not finite".into()));
    }
    let inv_var_sum = s.inverse_variance_sum();
    let residual = |lambda: f64| constrained_cv2(lambda, inv_var_sum) - target;

    let r0 = residual(0.0);
    let (mut lo, mut hi) = (0.0, lambda0.clamp(1e-3, LAMBDA_MAX));
    let mut r_hi = residual(hi);
    while r_hi <= 0.0 && hi < LAMBDA_MAX {
        lo = hi;
        hi = (2.0 * hi).min(LAMBDA_MAX);
        r_hi = residual(hi);
    }
    if !(r0 < 0.0 && r_hi > 0.0) {
        if r0 == 0.0 {
            return Ok(FitResult {
                params: params_for_shape(0.0, inv_var_sum, lm.ln_m)?,
                lambda0,
                residual: 0.0,
                iterations: 0,
                method: FitMethod::LsknSlopeMatch,
            });
        }
        return Err(Error::NoBracket { lo: 0.0, hi: LAMBDA_MAX, residual_lo: r0, residual_hi: residual(LAMBDA_MAX) });
    }

    let root = roots::bisect_secant(residual, lo, hi, RESIDUAL_TOL, 0.0, MAX_ITERATIONS)?;
    if root.residual.abs() > RESIDUAL_TOL {
        return Err(Error::NoConvergence { iterations: root.iterations, residual: root.residual });
    }
    Ok(FitResult {
        params: params_for_shape(root.x, inv_var_sum, lm.ln_m)?,
        lambda0,
        residual: root.residual,
        iterations: root.iterations,
        method: FitMethod::LsknSlopeMatch,
    })
}

/// Lognormal with the same mean and variance as the sum.
pub fn fit_fenton_wilkinson(s: &SlnSpec) -> Result<LognormalComponent> {
    let lm = sln_log_moments(s);
    let var = lm.cv2().ln_1p();
    LognormalComponent::new(lm.ln_m - 0.5 * var, var.sqrt())
}

/// Minimum sample size for [`fit_log_domain_mom`].
pub const MIN_MOM_SAMPLES: usize = 10_000;

/// Largest skewness a skew normal can have (`delta -> 1`).
pub fn sn_max_skewness() -> f64 {
    let pi = std::f64::consts::PI;
    let m = (2.0 / pi).sqrt();
    0.5 * (4.0 - pi) * m.powi(3) / (1.0 - m * m).powf(1.5)
}

/// Skew-normal fit to `ln(samples)` by matching sample mean, variance and
/// skewness. Skewness is clamped just inside the attainable range.
pub fn fit_log_domain_mom(samples: &[f64]) -> Result<SkewNormalParams> {
    if samples.len() < MIN_MOM_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "log-domain moment matching needs at least {MIN_MOM_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if let Some(bad) = samples.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Domain(format!("log-domain moment matching needs positive samples, got {bad}")));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().map(|x| x.ln()).sum::<f64>() / n;
    let (mut m2, mut m3) = (0.0, 0.0);
    for x in samples {
        let d = x.ln() - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    let cap = sn_max_skewness() * (1.0 - 1e-9);
    let skew = (m3 / m2.powf(1.5)).clamp(-cap, cap);

    let pi = std::f64::consts::PI;
    let r = skew.abs().powf(2.0 / 3.0);
    let c = (0.5 * (4.0 - pi)).powf(2.0 / 3.0);
    let delta = skew.signum() * (0.5 * pi * r / (r + c)).sqrt();
    let omega = (m2 / (1.0 - 2.0 * delta * delta / pi)).sqrt();
    let epsilon = mean - omega * delta * (2.0 / pi).sqrt();
    let lambda = delta / (1.0 - delta * delta).sqrt();
    SkewNormalParams::new(lambda, epsilon, omega)
}
