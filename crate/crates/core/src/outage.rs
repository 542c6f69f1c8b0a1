//! Uplink-style outage in a hexagonal network with lognormal shadowing.
//!
//! The received-power ratio between the serving base station and the sum of
//! all co-channel interferers is modelled in natural-log units. The interference
//! sum is replaced by its LSKN fit, so the log-SIR is a normal minus a skew
//! normal, which is again skew normal.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dists::{sn_cdf, sn_quantile, LognormalComponent, SkewNormalParams, DB_SCALE};
use crate::error::{Error, Result};
use crate::lsknfit::{fit_lskn, FitResult};
use crate::mcengine::{Exec, NormalStream, RngSpec};
use crate::probscale::EmpiricalCdf;
use crate::slnmodel::SlnSpec;

fn default_rings() -> usize {
    18
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Cell range R in km.
    #[serde(rename = "cell_range_R")]
    pub cell_range: f64,
    #[serde(default = "default_rings")]
    pub rings: usize,
    /// Path-loss exponent.
    pub eta: f64,
    /// Shadowing standard deviation in dB.
    pub sigma_db: f64,
    /// Distance from the serving base station in km.
    #[serde(rename = "mobile_distance_r")]
    pub mobile_distance: f64,
}

impl NetworkConfig {
    pub fn new(cell_range: f64, rings: usize, eta: f64, sigma_db: f64, mobile_distance: f64) -> Result<Self> {
        let cfg = Self { cell_range, rings, eta, sigma_db, mobile_distance };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.cell_range > 0.0 && self.cell_range.is_finite()) {
            return bad(format!("cell range must be positive, got {}", self.cell_range));
        }
        if self.rings < 1 {
            return bad("at least one ring of interferers is required".into());
        }
        if !(self.eta > 2.0 && self.eta.is_finite()) {
            return bad(format!("path-loss exponent must exceed 2, got {}", self.eta));
        }
        if !(self.sigma_db >= 0.0 && self.sigma_db.is_finite()) {
            return bad(format!("shadowing deviation must be non-negative, got {}", self.sigma_db));
        }
        let d = 2.0 * self.half_distance();
        if !(self.mobile_distance > 0.0 && self.mobile_distance < d) {
            return bad(format!("mobile distance must lie in (0, {d}), got {}", self.mobile_distance));
        }
        Ok(())
    }

    /// Half the distance between adjacent base stations, `R sqrt(3) / 2`.
    pub fn half_distance(&self) -> f64 {
        self.cell_range * 3f64.sqrt() / 2.0
    }

    pub fn interferer_count(&self) -> usize {
        3 * self.rings * (self.rings + 1)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }
}

/// Distances from the mobile to every interfering site when the mobile sits
/// at `mobile_distance` from the serving site along `bearing` (radians, 0
/// points at a nearest neighbour).
pub fn interferer_distances_at(cfg: &NetworkConfig, bearing: f64) -> Vec<f64> {
    let d = 2.0 * cfg.half_distance();
    let (mx, my) = (cfg.mobile_distance * bearing.cos(), cfg.mobile_distance * bearing.sin());
    let n = cfg.rings as i64;
    let mut out = Vec::with_capacity(cfg.interferer_count());
    for q in -n..=n {
        for r in (-n).max(-q - n)..=n.min(-q + n) {
            if q == 0 && r == 0 {
                continue;
            }
            let x = d * (q as f64 + 0.5 * r as f64);
            let y = d * (r as f64 * 3f64.sqrt() / 2.0);
            out.push((x - mx).hypot(y - my));
        }
    }
    out
}

/// Interferer distances with the mobile on the segment towards a nearest
/// neighbouring base station.
pub fn interferer_geometry(cfg: &NetworkConfig) -> Vec<f64> {
    interferer_distances_at(cfg, 0.0)
}

/// Natural-log mean and deviation of the wanted signal power.
pub fn signal_component(cfg: &NetworkConfig) -> (f64, f64) {
    (-cfg.eta * cfg.mobile_distance.ln(), DB_SCALE * cfg.sigma_db)
}

/// Interference power as a lognormal sum, `mu_j = -eta ln r_j`. Requires
/// `sigma_db > 0`; see [`deterministic_interference`] otherwise.
pub fn interference_spec(cfg: &NetworkConfig) -> Result<SlnSpec> {
    cfg.validate()?;
    if cfg.sigma_db == 0.0 {
        return Err(Error::InvalidParameter(
            "without shadowing the interference is deterministic and has no lognormal form".into(),
        ));
    }
    let sigma = DB_SCALE * cfg.sigma_db;
    let comps = interferer_geometry(cfg)
        .into_iter()
        .map(|r| LognormalComponent::new(-cfg.eta * r.ln(), sigma))
        .collect::<Result<Vec<_>>>()?;
    SlnSpec::new(comps)
}

/// `sum_j r_j^{-eta}`.
pub fn deterministic_interference(cfg: &NetworkConfig) -> f64 {
    interferer_geometry(cfg).iter().map(|r| r.powf(-cfg.eta)).sum()
}

/// Skew-normal law of `signal - interference` in natural-log units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnDiffParams {
    pub lambda1: f64,
    pub epsilon1: f64,
    pub omega1: f64,
}

impl SnDiffParams {
    pub fn as_sn(&self) -> SkewNormalParams {
        SkewNormalParams::new(self.lambda1, self.epsilon1, self.omega1).expect("validated on construction")
    }
}

/// Law of `X - Y` for `X ~ N(signal_mu, signal_sigma^2)` and independent
/// `Y ~ SN(interference)`. Negating `Y` flips its slant, so `lambda1 <= 0`
/// whenever `lambda >= 0`.
pub fn sn_difference(signal_mu: f64, signal_sigma: f64, interference: SkewNormalParams) -> Result<SnDiffParams> {
    if !(signal_sigma >= 0.0 && signal_sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("signal deviation must be non-negative, got {signal_sigma}")));
    }
    let (l, w) = (interference.lambda, interference.omega);
    let ratio = signal_sigma / w;
    let lambda1 = -l / (1.0 + ratio * ratio * (1.0 + l * l)).sqrt();
    let d = SnDiffParams {
        lambda1,
        epsilon1: signal_mu - interference.epsilon,
        omega1: signal_sigma.hypot(w),
    };
    SkewNormalParams::new(d.lambda1, d.epsilon1, d.omega1)?;
    Ok(d)
}

/// Analytic outage model of one network configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageModel {
    pub config: NetworkConfig,
    /// LSKN fit of the interference sum; `None` without shadowing.
    pub interference_fit: Option<FitResult>,
    pub difference: Option<SnDiffParams>,
}

impl OutageModel {
    pub fn new(cfg: &NetworkConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.sigma_db == 0.0 {
            return Ok(Self { config: *cfg, interference_fit: None, difference: None });
        }
        let fit = fit_lskn(&interference_spec(cfg)?)?;
        let (mu, s) = signal_component(cfg);
        let diff = sn_difference(mu, s, fit.params)?;
        Ok(Self { config: *cfg, interference_fit: Some(fit), difference: Some(diff) })
    }

    /// Deterministic SIR in dB when there is no shadowing.
    fn fixed_sir_db(&self) -> f64 {
        let (mu, _) = signal_component(&self.config);
        (mu - deterministic_interference(&self.config).ln()) / DB_SCALE
    }

    /// `P(SIR_dB < threshold_db)`.
    pub fn probability(&self, threshold_db: f64) -> f64 {
        match self.difference {
            Some(d) => sn_cdf(DB_SCALE * threshold_db, d.as_sn()),
            None => {
                if self.fixed_sir_db() < threshold_db {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Threshold in dB at which the outage probability reaches `p`.
    pub fn threshold_at(&self, p: f64) -> Result<f64> {
        match self.difference {
            Some(d) => Ok(sn_quantile(p, d.as_sn())? / DB_SCALE),
            None => Ok(self.fixed_sir_db()),
        }
    }
}

pub fn outage_probability(cfg: &NetworkConfig, threshold_db: f64) -> Result<f64> {
    Ok(OutageModel::new(cfg)?.probability(threshold_db))
}

/// Simulated SIR in dB, one value per trial with fresh shadowing on every link.
/// Trial `j` draws `1 + M` normals: the signal first, then the interferers in
/// [`interferer_geometry`] order.
pub fn sir_db_samples(cfg: &NetworkConfig, rng: RngSpec, count: usize, exec: Exec) -> Result<Vec<f64>> {
    cfg.validate()?;
    if count == 0 {
        return Err(Error::InvalidParameter("trial count must be at least 1".into()));
    }
    let (mu_s, s) = signal_component(cfg);
    let mu: Vec<f64> = interferer_geometry(cfg).iter().map(|r| -cfg.eta * r.ln()).collect();
    let dims = 1 + mu.len();
    let mut out = vec![0.0; count];
    exec.fill(&mut out, |start, chunk| {
        let mut g = NormalStream::at(rng, dims, start);
        for v in chunk {
            let ln_signal = mu_s + s * g.next_normal();
            let interference: f64 = mu.iter().map(|m| (m + s * g.next_normal()).exp()).sum();
            *v = (ln_signal - interference.ln()) / DB_SCALE;
        }
    });
    Ok(out)
}

/// Fraction of `count` simulated trials with SIR below `threshold_db`.
pub fn outage_mc(cfg: &NetworkConfig, threshold_db: f64, rng: RngSpec, count: usize, exec: Exec) -> Result<f64> {
    let sir = sir_db_samples(cfg, rng, count, exec)?;
    Ok(sir.iter().filter(|&&x| x < threshold_db).count() as f64 / count as f64)
}

/// Outage probability on a threshold grid, analytic and simulated.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageCurve {
    pub threshold_db: Vec<f64>,
    pub p_analytic: Vec<f64>,
    pub p_mc: Vec<f64>,
}

impl OutageCurve {
    /// Evaluates both columns; `sir_db` are simulated SIR values.
    pub fn build(model: &OutageModel, sir_db: &[f64], thresholds: &[f64]) -> Self {
        let mut sorted = sir_db.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let n = sorted.len() as f64;
        Self {
            threshold_db: thresholds.to_vec(),
            p_analytic: thresholds.iter().map(|&t| model.probability(t)).collect(),
            p_mc: thresholds.iter().map(|&t| sorted.partition_point(|&x| x < t) as f64 / n).collect(),
        }
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["threshold_db", "p_analytic", "p_mc"])?;
        for i in 0..self.threshold_db.len() {
            out.write_record([
                self.threshold_db[i].to_string(),
                self.p_analytic[i].to_string(),
                self.p_mc[i].to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Thresholds `lo, lo + step, ..., hi`.
pub fn threshold_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

/// `|t_analytic(p) - t_mc(p)|` in dB at each probability level: the horizontal
/// gap between the two outage curves.
pub fn horizontal_offsets(model: &OutageModel, sir_db: &[f64], levels: &[f64]) -> Result<Vec<f64>> {
    let e = EmpiricalCdf::new(sir_db.to_vec())?;
    levels.iter().map(|&p| Ok((model.threshold_at(p)? - e.quantile(p)).abs())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dists::sn_pdf;

    fn cfg(rings: usize, sigma_db: f64, r: f64) -> NetworkConfig {
        NetworkConfig::new(1.0, rings, 3.0, sigma_db, r).unwrap()
    }

    #[test]
    fn interferer_counts() {
        assert_eq!(interferer_geometry(&cfg(1, 3.0, 0.5)).len(), 6);
        assert_eq!(interferer_geometry(&cfg(18, 3.0, 0.5)).len(), 1026);
    }

    #[test]
    fn mobile_near_serving_site() {
        let c = cfg(2, 3.0, 1e-9);
        let nearest = interferer_geometry(&c).into_iter().fold(f64::INFINITY, f64::min);
        assert!((nearest - 2.0 * c.half_distance()).abs() < 1e-8);
        let c = cfg(2, 3.0, c.half_distance());
        let nearest = interferer_geometry(&c).into_iter().fold(f64::INFINITY, f64::min);
        assert!((nearest - c.half_distance()).abs() < 1e-12);
    }

    #[test]
    fn sixty_degree_symmetry() {
        let c = cfg(3, 3.0, 0.4);
        let mut a = interferer_distances_at(&c, 0.2);
        let mut b = interferer_distances_at(&c, 0.2 + std::f64::consts::FRAC_PI_3);
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn config_validation_and_json() {
        assert!(NetworkConfig::new(1.0, 18, 2.0, 3.0, 0.5).is_err());
        assert!(NetworkConfig::new(1.0, 0, 3.0, 3.0, 0.5).is_err());
        assert!(NetworkConfig::new(1.0, 18, 3.0, 3.0, 2.0).is_err());
        let c = NetworkConfig::from_json_str(r#"{"cell_range_R": 1.0, "eta": 3.0, "sigma_db": 6.0, "mobile_distance_r": 0.433}"#)
            .unwrap();
        assert_eq!(c.rings, 18);
        assert_eq!(NetworkConfig::from_json_str(&c.to_json()).unwrap(), c);
        assert!(NetworkConfig::from_json_str(r#"{"cell_range_R": 1.0, "eta": 3.0, "sigma_db": 6.0, "mobile_distance_r": 0.4, "noise": 1}"#).is_err());
    }

    #[test]
    fn interference_spec_shape() {
        let c = cfg(1, 6.0, 1e-12);
        let s = interference_spec(&c).unwrap();
        let mu0 = s.components()[0].mu();
        for comp in s.components() {
            assert!((comp.mu() - mu0).abs() < 1e-9);
            assert!((comp.sigma() - 6.0 * DB_SCALE).abs() < 1e-15);
        }
        assert!(interference_spec(&cfg(1, 0.0, 0.5)).is_err());
    }

    #[test]
    fn difference_reductions() {
        let y = SkewNormalParams::new(2.0, 0.5, 1.5).unwrap();
        let d = sn_difference(1.0, 0.0, y).unwrap();
        assert_eq!((d.lambda1, d.epsilon1, d.omega1), (-2.0, 0.5, 1.5));
        let z = SkewNormalParams::new(0.0, 0.5, 1.5).unwrap();
        let d = sn_difference(1.0, 2.0, z).unwrap();
        assert_eq!(d.lambda1, 0.0);
        assert!((d.omega1 - 2.5).abs() < 1e-15);
        assert!(sn_difference(0.0, -1.0, y).is_err());
    }

    #[test]
    fn difference_density_is_a_convolution() {
        // f_{X-Y}(t) = int phi_s(t - m + y) f_Y(y) dy, by Gauss-Legendre on a wide panel set
        let y = SkewNormalParams::new(2.0, 0.0, 1.0).unwrap();
        let (m, s) = (0.3, 0.8);
        let d = sn_difference(m, s, y).unwrap().as_sn();
        for t in [-3.0, -1.0, 0.0, 0.7, 2.0] {
            let mut conv = 0.0;
            for k in 0..40 {
                let a = -6.0 + 0.3 * k as f64;
                conv += crate::specfun::gauss_legendre_integrate(a, a + 0.3, |u| {
                    let z = (t - m + u) / s;
                    crate::specfun::norm_pdf(z) / s * sn_pdf(u, y)
                });
            }
            assert!((conv - sn_pdf(t, d)).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn analytic_outage_monotone() {
        let near = OutageModel::new(&cfg(2, 6.0, 0.3)).unwrap();
        let far = OutageModel::new(&cfg(2, 6.0, 0.8)).unwrap();
        let grid = threshold_grid(-30.0, 30.0, 0.5);
        assert_eq!(grid.len(), 121);
        let mut prev = 0.0;
        for &t in &grid {
            let p = near.probability(t);
            assert!(p >= prev && (0.0..=1.0).contains(&p));
            assert!(far.probability(t) >= p);
            prev = p;
        }
        assert!(near.probability(-400.0) < 1e-12);
        assert!(near.probability(400.0) > 1.0 - 1e-12);
    }

    #[test]
    fn no_shadowing_is_a_step() {
        let c = cfg(2, 0.0, 0.5);
        let model = OutageModel::new(&c).unwrap();
        let sir = sir_db_samples(&c, RngSpec::new(1, 0), 16, Exec::Sequential).unwrap();
        let fixed = model.threshold_at(0.5).unwrap();
        assert!(sir.iter().all(|&x| (x - fixed).abs() < 1e-9));
        assert_eq!(model.probability(fixed - 0.01), 0.0);
        assert_eq!(model.probability(fixed + 0.01), 1.0);
        assert_eq!(outage_mc(&c, fixed + 0.01, RngSpec::new(1, 0), 16, Exec::Sequential).unwrap(), 1.0);
    }

    #[test]
    fn curve_csv() {
        let c = cfg(1, 3.0, 0.5);
        let model = OutageModel::new(&c).unwrap();
        let sir = sir_db_samples(&c, RngSpec::new(2, 0), 2000, Exec::Sequential).unwrap();
        let curve = OutageCurve::build(&model, &sir, &[-10.0, 0.0, 60.0]);
        assert_eq!(curve.p_mc[2], 1.0);
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("threshold_db,p_analytic,p_mc\n-10,"));
        assert_eq!(text.lines().count(), 4);
    }
}
