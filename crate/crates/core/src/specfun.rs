//! Exponential integral E₁ and the factor `1 − x·eˣ·E₁(x)` of the
//! capacity upper bound.

use crate::error::{domain, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;
/// Above this E₁ underflows (E₁(700) ≈ 1.4e−307).
const UNDERFLOW_X: f64 = 700.0;

fn check_arg(x: f64) -> Result<()> {
    if x.is_nan() || x <= 0.0 {
        return domain(format!("argument must be positive, got {x}"));
    }
    Ok(())
}

/// Power series E₁(x) = −γ − ln x − Σ (−x)ᵏ/(k·k!), for 0 < x ≤ 1.
fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..MAX_ITER {
        let kf = k as f64;
        term *= -x / kf;
        let add = term / kf;
        sum += add;
        if add.abs() <= EPS * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// Continued fraction for `eˣ·Eₙ(x)`, x > 1 (modified Lentz).
fn scaled_en_cf(n: u32, x: f64) -> f64 {
    let tiny = 1e-300;
    let nf = f64::from(n);
    let mut b = x + nf;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        let an = -fi * (nf - 1.0 + fi);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() <= EPS {
            break;
        }
    }
    h
}

/// E₁(x) = ∫₁^∞ e^{−tx}/t dt.
///
/// Returns 0 for x > 700 where the true value is below 1e−300.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(if x <= 1.0 {
        e1_series(x)
    } else if x > UNDERFLOW_X {
        0.0
    } else {
        scaled_en_cf(1, x) * (-x).exp()
    })
}

/// `1 − x·eˣ·E₁(x)`, safe for arbitrarily large `x`.
///
/// For x > 1 this equals `eˣ·E₂(x)` (from E₂(x) = e^{−x} − x·E₁(x)), which
/// the continued fraction yields without forming eˣ or cancelling.
pub fn one_minus_x_ex_e1(x: f64) -> Result<f64> {
    check_arg(x)?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(if x <= 1.0 { 1.0 - x * x.exp() * e1_series(x) } else { scaled_en_cf(2, x) })
}

#[cfg(test)]
#[path = "../tests/common/quadrature.rs"]
mod quadrature;
