//! The lognormal probability scale and CDF comparison metrics.
//!
//! On this scale a CDF `F` is drawn as `x -> Phi^{-1}(F(e^x))`, which turns any
//! lognormal into a straight line of slope `1/sigma`.

use std::io::Write;

use crate::dists::TailCdf;
use crate::error::{Error, Result};
use crate::mcengine::Exec;
use crate::specfun::norm_quantile;

/// CDF values outside `(PROBIT_GUARD, 1 - PROBIT_GUARD)` are not plotted.
pub const PROBIT_GUARD: f64 = 1e-15;

/// Default comparison region in empirical-CDF terms.
pub const DEFAULT_REGION: (f64, f64) = (0.001, 0.999);

/// Right-continuous step CDF of a sample: `F(x) = #{x_k <= x} / n`.
///
/// The k-th smallest sample (1-based) therefore sits at `k/n`; for an odd
/// sample the median lands at `(n+1)/(2n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InsufficientData(format!("empirical CDF needs at least 2 samples, got {}", samples.len())));
        }
        if let Some(bad) = samples.iter().find(|x| x.is_nan()) {
            return Err(Error::Domain(format!("empirical CDF sample is {bad}")));
        }
        samples.sort_unstable_by(f64::total_cmp);
        Ok(Self { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted_samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }

    /// Smallest sample whose empirical CDF reaches `p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.len();
        let k = ((p * n as f64).ceil() as usize).clamp(1, n);
        self.sorted[k - 1]
    }

    /// Index range of sample points with empirical CDF in `[lo, hi]`, with
    /// ties resolved to the last member of each run.
    fn region_points(&self, lo: f64, hi: f64) -> impl Iterator<Item = usize> + '_ {
        let n = self.len();
        let nf = n as f64;
        let first = ((lo * nf).ceil() as usize).max(1);
        let last = ((hi * nf).floor() as usize).min(n);
        (first..=last)
            .map(|k| k - 1)
            .filter(move |&i| i + 1 == n || self.sorted[i + 1] > self.sorted[i])
    }

    /// The sample drawn on the probability scale: `(ln x_(k), Phi^{-1}(k/n))`
    /// for every sample point with empirical CDF in `[lo, hi]`.
    pub fn probit_curve(&self, lo: f64, hi: f64) -> ProbitCurve {
        let n = self.len() as f64;
        let mut curve = ProbitCurve::default();
        for i in self.region_points(lo, hi) {
            let x = self.sorted[i];
            let p = (i + 1) as f64 / n;
            if x > 0.0 && p > PROBIT_GUARD && p < 1.0 - PROBIT_GUARD {
                curve.points.push((x.ln(), norm_quantile(p).expect("p inside guard")));
            } else {
                curve.dropped += 1;
            }
        }
        curve
    }
}

/// Points `(ln l, Phi^{-1}(F(l)))`, ascending in the first coordinate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProbitCurve {
    pub points: Vec<(f64, f64)>,
    /// Grid points omitted because the probit was not finite or was guarded.
    pub dropped: usize,
}

impl ProbitCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Maps `cdf` onto the probability scale at log-abscissae `xs`. Points with
/// `F(e^x)` outside `(PROBIT_GUARD, 1 - PROBIT_GUARD)` are dropped and counted.
pub fn g_transform(cdf: impl Fn(f64) -> f64, xs: &[f64]) -> ProbitCurve {
    let mut curve = ProbitCurve::default();
    for &x in xs {
        let f = cdf(x.exp());
        if f > PROBIT_GUARD && f < 1.0 - PROBIT_GUARD {
            curve.points.push((x, norm_quantile(f).expect("f inside guard")));
        } else {
            curve.dropped += 1;
        }
    }
    curve
}

/// Like [`g_transform`] but through log-probabilities, so the curve
/// continues far past the guard. Only points with non-finite probit are dropped.
pub fn g_transform_tail(d: &impl TailCdf, xs: &[f64]) -> ProbitCurve {
    let mut curve = ProbitCurve::default();
    for &x in xs {
        let y = d.probit(x.exp());
        if y.is_finite() {
            curve.points.push((x, y));
        } else {
            curve.dropped += 1;
        }
    }
    curve
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Least-squares slope through the outermost `window` points on one side.
pub fn tail_slope_estimate(c: &ProbitCurve, side: Side, window: usize) -> Result<f64> {
    if window < 2 || c.len() < window + 1 {
        return Err(Error::InsufficientData(format!(
            "slope window of {window} needs at least {} curve points, have {}",
            window.max(2) + 1,
            c.len()
        )));
    }
    let pts = match side {
        Side::Left => &c.points[..window],
        Side::Right => &c.points[c.len() - window..],
    };
    let n = window as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(x, y) in pts {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return Err(Error::Domain("slope window has no spread in x".into()));
    }
    Ok(sxy / sxx)
}

/// `max |F_emp(x_k) - F(x_k)|` over sample points whose empirical CDF lies in
/// `region`.
pub fn max_cdf_error<F>(reference: &EmpiricalCdf, cdf: F, region: (f64, f64), exec: Exec) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let idx: Vec<usize> = reference.region_points(region.0, region.1).collect();
    if idx.is_empty() {
        return Err(Error::InsufficientData(format!("no sample points with empirical CDF in {region:?}")));
    }
    let n = reference.len() as f64;
    let s = reference.sorted_samples();
    Ok(exec.max_over(idx.len(), |j| {
        let i = idx[j];
        ((i + 1) as f64 / n - cdf(s[i])).abs()
    }))
}

/// Kolmogorov-Smirnov distance `sup |F_emp - F|`, counting both sides of
/// every step.
pub fn ks_statistic<F>(reference: &EmpiricalCdf, cdf: F, exec: Exec) -> f64
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let n = reference.len() as f64;
    let s = reference.sorted_samples();
    exec.max_over(s.len(), |i| {
        let f = cdf(s[i]);
        (f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Critical value of the KS distance at the 1% level, `1.63 / sqrt(n)`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Curves sampled on a shared `x` grid, written as CSV with one column per curve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CurveTable {
    pub x: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl CurveTable {
    pub fn new(x: Vec<f64>) -> Self {
        Self { x, columns: Vec::new() }
    }

    pub fn push(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.x.len() {
            return Err(Error::InvalidParameter(format!(
                "column {name} has {} values for {} grid points",
                values.len(),
                self.x.len()
            )));
        }
        self.columns.push((name.to_string(), values));
        Ok(())
    }

    /// Non-finite values are written as empty fields.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["x".to_string()];
        header.extend(self.columns.iter().map(|c| c.0.clone()));
        out.write_record(&header)?;
        for (i, x) in self.x.iter().enumerate() {
            let mut row = vec![x.to_string()];
            for (_, v) in &self.columns {
                row.push(if v[i].is_finite() { v[i].to_string() } else { String::new() });
            }
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}
