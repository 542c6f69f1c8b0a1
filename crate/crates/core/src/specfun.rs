//! Scalar special functions: the standard normal density, distribution,
//! quantile (also from a log-probability), and Owen's T function.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// `1 / sqrt(2 pi)`.
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `ln(sqrt(2 pi))`.
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Natural log of the standard normal density.
#[inline]
pub fn ln_norm_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Standard normal distribution function.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal survival function `1 - Phi(x)`, accurate in the upper tail.
#[inline]
pub fn norm_sf(x: f64) -> f64 {
    norm_cdf(-x)
}

/// Mills ratio `Q(t) / phi(t)` for large positive `t`, by the classical
/// continued fraction `1/(t + 1/(t + 2/(t + 3/(t + ...))))`.
fn mills_ratio_cf(t: f64) -> f64 {
    let mut f = t;
    for k in (1..=60).rev() {
        f = t + k as f64 / f;
    }
    1.0 / f
}

/// `ln Phi(x)`, finite for every finite `x`.
pub fn ln_norm_cdf(x: f64) -> f64 {
    if x > 0.0 {
        (-norm_sf(x)).ln_1p()
    } else if x > -30.0 {
        norm_cdf(x).ln()
    } else {
        ln_norm_pdf(x) + mills_ratio_cf(-x).ln()
    }
}

#[inline]
fn horner(c: &[f64; 8], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// Quantile for `0 < p <= 0.5` by Wichura's AS 241 rational approximations,
/// good to about 1e-16 relative without iteration.
#[allow(clippy::excessive_precision)]
fn lower_quantile(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_6,
        1.331_416_678_917_843_8e2,
        1.971_590_950_306_551_4e3,
        1.373_169_376_550_946_1e4,
        4.592_195_393_154_987_1e4,
        6.726_577_092_700_870_1e4,
        3.343_057_558_358_812_8e4,
        2.509_080_928_730_122_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091_1e1,
        6.871_870_074_920_579e2,
        5.394_196_021_424_751e3,
        2.121_379_430_158_659_6e4,
        3.930_789_580_009_271e4,
        2.872_908_573_572_194_3e4,
        5.226_495_278_852_546e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_6,
        4.630_337_846_156_545,
        5.769_497_221_460_691,
        3.647_848_324_763_204_6,
        1.270_458_252_452_368_4,
        2.417_807_251_774_506e-1,
        2.272_384_498_926_918_4e-2,
        7.745_450_142_783_414e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_8,
        1.676_384_830_183_803_8,
        6.897_673_349_851e-1,
        1.481_039_764_274_800_7e-1,
        1.519_866_656_361_645_7e-2,
        5.475_938_084_995_345e-4,
        1.050_750_071_644_416_8e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103,
        5.463_784_911_164_114,
        1.784_826_539_917_291_3,
        2.965_605_718_285_048_9e-1,
        2.653_218_952_657_612_3e-2,
        1.242_660_947_388_078_4e-3,
        2.711_555_568_743_487_6e-5,
        2.010_334_399_292_288_1e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_879e-1,
        1.369_298_809_227_358e-1,
        1.487_536_129_085_061_5e-2,
        7.868_691_311_456_133e-4,
        1.846_318_317_510_054_8e-5,
        1.421_511_758_316_446e-7,
        2.044_263_103_389_939_8e-15,
    ];

    let q = p - 0.5;
    if q >= -0.425 {
        let r = 0.180_625 - q * q;
        return q * horner(&A, r) / horner(&B, r);
    }
    let r = (-p.ln()).sqrt();
    if r <= 5.0 {
        let r = r - 1.6;
        -horner(&C, r) / horner(&D, r)
    } else {
        let r = r - 5.0;
        -horner(&E, r) / horner(&F, r)
    }
}

/// Standard normal quantile `Phi^{-1}(p)`.
///
/// Odd about `p = 0.5` by construction: the upper half is computed as the
/// negated lower-half quantile of `1 - p`, which is exact in `f64`.
pub fn norm_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("norm_quantile requires 0 < p < 1, got {p}")));
    }
    Ok(if p == 0.5 {
        0.0
    } else if p < 0.5 {
        if p < 1e-300 {
            quantile_from_ln_lower(p.ln())
        } else {
            lower_quantile(p)
        }
    } else {
        -lower_quantile(1.0 - p)
    })
}

/// Probit of a probability given by its logarithm, `Phi^{-1}(exp(ln_p))`.
///
/// Stays finite and accurate for `ln_p` far below the `f64` underflow
/// threshold, which the lognormal-probability-scale tails need.
pub fn norm_quantile_ln(ln_p: f64) -> Result<f64> {
    if ln_p.is_nan() || ln_p >= 0.0 {
        return Err(Error::Domain(format!("norm_quantile_ln requires ln_p < 0, got {ln_p}")));
    }
    if ln_p > -std::f64::consts::LN_2 {
        // p > 1/2: use the complement, computed without cancellation.
        return Ok(-lower_quantile(-ln_p.exp_m1()));
    }
    if ln_p > -690.0 {
        return Ok(lower_quantile(ln_p.exp()));
    }
    Ok(quantile_from_ln_lower(ln_p))
}

/// Newton iteration on `ln Phi(x) = ln_p` for very small probabilities.
fn quantile_from_ln_lower(ln_p: f64) -> f64 {
    // Asymptotic seed from ln Q(t) ~ -t^2/2 - ln t - ln sqrt(2 pi).
    let mut t = (-2.0 * ln_p).sqrt();
    for _ in 0..4 {
        t = (-2.0 * ln_p - 2.0 * t.ln() - 2.0 * LN_SQRT_2PI).max(1.0).sqrt();
    }
    let mut x = -t;
    for _ in 0..20 {
        let f = ln_norm_cdf(x) - ln_p;
        // d/dx ln Phi(x) = phi(x)/Phi(x) = 1 / mills(-x)
        let deriv = (ln_norm_pdf(x) - ln_norm_cdf(x)).exp();
        let step = f / deriv;
        x -= step;
        if step.abs() <= 1e-15 * x.abs() {
            break;
        }
    }
    x
}

const GL_ORDER: usize = 20;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre() -> &'static [(f64, f64); GL_ORDER] {
    static RULE: OnceLock<[(f64, f64); GL_ORDER]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut rule = [(0.0, 0.0); GL_ORDER];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            rule[i] = (-x, w);
            rule[n - 1 - i] = (x, w);
        }
        rule
    })
}

/// Single-panel 20-point Gauss-Legendre integral of `f` over `[a, b]`.
pub fn gauss_legendre_integrate(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let sum: f64 = gauss_legendre().iter().map(|&(x, w)| w * f(mid + half * x)).sum();
    sum * half
}

/// `integral_0^a exp(-h^2 (1+t^2)/2) / (1+t^2) dt / (2 pi)` for `h >= 0`,
/// `0 <= a <= 1`, by composite Gauss-Legendre. Panels are narrow enough
/// that each spans at most 2.5 standard deviations of the Gaussian factor.
fn owens_t_quad(h: f64, a: f64) -> f64 {
    let half_h2 = 0.5 * h * h;
    if half_h2 > 745.0 || a == 0.0 {
        return 0.0;
    }
    let panels = ((h * a / 2.5).ceil() as usize).clamp(1, 64);
    let width = a / panels as f64;
    let rule = gauss_legendre();
    let mut sum = 0.0;
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * width;
        let half = 0.5 * width;
        let mut panel = 0.0;
        for &(node, weight) in rule.iter() {
            let t = mid + half * node;
            let u = 1.0 + t * t;
            panel += weight * (-half_h2 * u).exp() / u;
        }
        sum += panel * half;
    }
    sum / (2.0 * PI)
}

/// Owen's T function `T(h, a) = (1/2pi) integral_0^a exp(-h^2(1+t^2)/2)/(1+t^2) dt`.
///
/// For `|a| > 1` the integral is folded onto `[0, 1/|a|]` with
/// `T(h,a) = [Phi(h) Q(ah) + Phi(ah) Q(h)]/2 - T(ah, 1/a)` (`h, a >= 0`),
/// whose leading term is a sum of positive products.
pub fn owens_t(h: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let sign = a.signum();
    let a = a.abs();
    let h = h.abs();
    if a <= 1.0 {
        return sign * owens_t_quad(h, a);
    }
    let ah = a * h;
    let lead = 0.5 * (norm_cdf(h) * norm_sf(ah) + norm_cdf(ah) * norm_sf(h));
    sign * (lead - owens_t_quad(ah, 1.0 / a))
}
