//! Bracketed scalar root finding.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Finds a zero of `f` in `[lo, hi]`, where `f(lo)` and `f(hi)` differ in sign.
///
/// Each step tries the secant (regula falsi) point of the current bracket and
/// falls back to bisection when that point is not finite, lands outside the
/// bracket, or the bracket failed to halve over the last two steps. Stops when
/// `|f(x)| <= f_tol` or the bracket is narrower than `x_tol`.
pub fn bisect_secant<F>(f: F, lo: f64, hi: f64, f_tol: f64, x_tol: f64, max_iter: usize) -> Result<Root>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(Root { x: a, residual: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, residual: 0.0, iterations: 0 });
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoBracket { lo: a, hi: b, residual_lo: fa, residual_hi: fb });
    }

    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    let mut width_two_back = f64::INFINITY;
    let mut width_one_back = b - a;
    for it in 1..=max_iter {
        let width = b - a;
        let secant = if fa.is_finite() && fb.is_finite() {
            b - fb * (b - a) / (fb - fa)
        } else {
            f64::NAN
        };
        let stalled = width > 0.5 * width_two_back;
        let x = if secant.is_finite() && secant > a && secant < b && !stalled {
            secant
        } else {
            0.5 * (a + b)
        };
        width_two_back = width_one_back;
        width_one_back = width;

        let fx = f(x);
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= f_tol || fx == 0.0 {
            return Ok(Root { x, residual: fx, iterations: it });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        if b - a <= x_tol || b <= next_up(a) {
            return Ok(Root { x: best.0, residual: best.1, iterations: it });
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: best.1 })
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    f64::from_bits(if x > 0.0 { bits + 1 } else { bits - 1 })
}
