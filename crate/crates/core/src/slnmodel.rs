//! Sums of independent lognormals: exact moments and probit-scale tail slopes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dists::LognormalComponent;
use crate::error::{Error, Result};

/// `Lambda = sum_i exp(X_i)` with independent `X_i ~ N(mu_i, sigma_i^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlnSpec {
    components: Vec<LognormalComponent>,
}

/// Mean and variance of the sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlnMoments {
    pub m: f64,
    pub d2: f64,
}

/// Natural logs of the mean and variance; finite even when the moments
/// themselves overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlnLogMoments {
    pub ln_m: f64,
    pub ln_d2: f64,
}

impl SlnLogMoments {
    /// Squared coefficient of variation `d2 / m^2`.
    pub fn cv2(&self) -> f64 {
        (self.ln_d2 - 2.0 * self.ln_m).exp()
    }
}

impl SlnSpec {
    pub fn new(components: Vec<LognormalComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("a lognormal sum needs at least one component".into()));
        }
        Ok(Self { components })
    }

    /// `n` independent copies of one component.
    pub fn iid(n: usize, c: LognormalComponent) -> Result<Self> {
        Self::new(vec![c; n])
    }

    /// Components from `(mu_db, sigma_db)` pairs.
    pub fn from_db<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let components = pairs
            .into_iter()
            .map(|(m, s)| LognormalComponent::from_db(m, s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn components(&self) -> &[LognormalComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Every `mu_i` shifted by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self { components: self.components.iter().map(|x| x.shifted(c)).collect() }
    }

    /// The sum of both specs' summands.
    pub fn concat(&self, other: &SlnSpec) -> Self {
        let mut components = self.components.clone();
        components.extend_from_slice(&other.components);
        Self { components }
    }

    /// `sum_i sigma_i^{-2}`.
    pub fn inverse_variance_sum(&self) -> f64 {
        self.components.iter().map(|c| c.sigma().powi(-2)).sum()
    }

    pub fn max_sigma(&self) -> f64 {
        self.components.iter().map(|c| c.sigma()).fold(0.0, f64::max)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: SpecDocument = serde_json::from_str(s)?;
        doc.into_spec()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    /// Natural-log document form, `{"components":[{"mu":..,"sigma":..}, ..]}`.
    pub fn to_json(&self) -> String {
        let doc = serde_json::json!({
            "components": self.components.iter()
                .map(|c| serde_json::json!({"mu": c.mu(), "sigma": c.sigma()}))
                .collect::<Vec<_>>()
        });
        doc.to_string()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDocument {
    components: Vec<RawComponent>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    mu: Option<f64>,
    sigma: Option<f64>,
    mu_db: Option<f64>,
    sigma_db: Option<f64>,
}

impl SpecDocument {
    fn into_spec(self) -> Result<SlnSpec> {
        let mut db = None;
        let mut out = Vec::with_capacity(self.components.len());
        for (i, c) in self.components.into_iter().enumerate() {
            let (is_db, comp) = match c {
                RawComponent { mu: None, sigma: None, mu_db: Some(m), sigma_db: Some(s) } => {
                    (true, LognormalComponent::from_db(m, s)?)
                }
                RawComponent { mu: Some(m), sigma: Some(s), mu_db: None, sigma_db: None } => {
                    (false, LognormalComponent::new(m, s)?)
                }
                _ => {
                    return Err(Error::Parse(format!(
                        "component {i}: expected exactly {{mu_db, sigma_db}} or {{mu, sigma}}"
                    )))
                }
            };
            match db {
                None => db = Some(is_db),
                Some(prev) if prev != is_db => {
                    return Err(Error::Parse("mixed dB and natural-log components in one document".into()))
                }
                _ => {}
            }
            out.push(comp);
        }
        SlnSpec::new(out)
    }
}

/// Raw moment `E[L^p] = exp(mu p + sigma^2 p^2 / 2)` of one lognormal.
/// Returns `+inf` on overflow; callers decide whether that is an error.
pub fn component_moment(c: LognormalComponent, p: u32) -> f64 {
    let p = p as f64;
    (c.mu() * p + 0.5 * c.sigma() * c.sigma() * p * p).exp()
}

fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `ln m` and `ln d2` by log-sum-exp over the per-component terms.
pub fn sln_log_moments(s: &SlnSpec) -> SlnLogMoments {
    let cs = s.components();
    let ln_m = log_sum_exp(cs.iter().map(|c| c.mu() + 0.5 * c.sigma() * c.sigma()));
    let ln_d2 = log_sum_exp(cs.iter().map(|c| {
        let v = c.sigma() * c.sigma();
        2.0 * c.mu() + v + v.exp_m1().ln()
    }));
    SlnLogMoments { ln_m, ln_d2 }
}

/// Mean and variance of the sum; independence makes the variances add.
pub fn sln_moments(s: &SlnSpec) -> Result<SlnMoments> {
    let cs = s.components();
    let direct = |f: &dyn Fn(&LognormalComponent) -> f64| cs.iter().map(f).sum::<f64>();
    let m = direct(&|c| (c.mu() + 0.5 * c.sigma() * c.sigma()).exp());
    let d2 = direct(&|c| {
        let v = c.sigma() * c.sigma();
        (2.0 * c.mu() + v).exp() * v.exp_m1()
    });
    if m.is_finite() && d2.is_finite() && m > 0.0 && d2 > 0.0 {
        return Ok(SlnMoments { m, d2 });
    }
    // Large exponents: go through logs, then report if the result itself
    // is not representable.
    let lm = sln_log_moments(s);
    let (m, d2) = (lm.ln_m.exp(), lm.ln_d2.exp());
    if !(m.is_finite() && d2.is_finite()) {
        return Err(Error::Overflow(format!(
            "lognormal-sum moments exceed f64 range (ln m = {}, ln d2 = {})",
            lm.ln_m, lm.ln_d2
        )));
    }
    if m == 0.0 || d2 == 0.0 {
        return Err(Error::Overflow(format!(
            "lognormal-sum moments underflow (ln m = {}, ln d2 = {})",
            lm.ln_m, lm.ln_d2
        )));
    }
    Ok(SlnMoments { m, d2 })
}

/// Limiting right-tail slope on the lognormal probability scale, `1 / max sigma_i`.
pub fn sln_right_slope(s: &SlnSpec) -> f64 {
    1.0 / s.max_sigma()
}

/// Limiting left-tail slope on the lognormal probability scale, `sqrt(sum sigma_i^{-2})`.
pub fn sln_left_slope(s: &SlnSpec) -> f64 {
    s.inverse_variance_sum().sqrt()
}
