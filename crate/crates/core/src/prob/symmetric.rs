//! Elementary symmetric functions and the factorial-series tail estimates.

use crate::error::{Error, Result};

/// `[σ_0, σ_1, …, σ_{d_max}]` of `y`: the low coefficients of `Π (1 + y_k x)`.
pub fn elementary_symmetric(y: &[f64], d_max: usize) -> Result<Vec<f64>> {
    if d_max > y.len() {
        return Err(Error::DegreeOutOfRange {
            d: d_max,
            max: y.len(),
        });
    }
    let mut sigma = vec![0.0; d_max + 1];
    sigma[0] = 1.0;
    for (k, &yk) in y.iter().enumerate() {
        let top = (k + 1).min(d_max);
        for d in (1..=top).rev() {
            sigma[d] += yk * sigma[d - 1];
        }
    }
    Ok(sigma)
}

pub(crate) fn ln_factorial(d: usize) -> f64 {
    (2..=d).map(|k| (k as f64).ln()).sum()
}

pub(crate) fn choose2(d: usize) -> f64 {
    if d < 2 {
        0.0
    } else {
        (d * (d - 1) / 2) as f64
    }
}

/// Bounds on `σ_d`:
/// `σ_1^d / d! · (1 − C(d,2) σ_1^{-2} Σ y_k²) ≤ σ_d ≤ σ_1^d / d!`.
pub fn symmetric_bounds(y: &[f64], d: usize) -> Result<(f64, f64)> {
    if d < 1 || d > y.len() {
        return Err(Error::DegreeOutOfRange { d, max: y.len() });
    }
    let sigma1: f64 = y.iter().sum();
    let squares: f64 = y.iter().map(|v| v * v).sum();
    if sigma1 == 0.0 {
        return Ok((0.0, 0.0));
    }
    let upper = (d as f64 * sigma1.ln() - ln_factorial(d)).exp();
    let correction = if d < 2 {
        1.0
    } else {
        1.0 - choose2(d) * squares / (sigma1 * sigma1)
    };
    Ok((upper * correction, upper))
}

/// `Σ_{d ≥ U} ξ^d / d! ≤ (eξ/U)^U`, valid for `0 < ξ ≤ U`.
pub fn upper_tail_bound(xi: f64, u: f64) -> Result<f64> {
    if !(xi > 0.0 && xi <= u) {
        return Err(Error::TailPrecondition("upper tail needs 0 < xi <= U"));
    }
    Ok((u * (1.0 + xi.ln() - u.ln())).exp())
}

/// `Σ_{0 ≤ d ≤ V} ξ^d / d! ≤ (eξ/V)^V`, valid for `0 < V ≤ ξ`.
pub fn head_bound(xi: f64, v: f64) -> Result<f64> {
    if !(v > 0.0 && v <= xi) {
        return Err(Error::TailPrecondition("head needs 0 < V <= xi"));
    }
    Ok((v * (1.0 + xi.ln() - v.ln())).exp())
}

/// Both factorial-series bounds; a `None` marks a bound whose precondition
/// fails for the given arguments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailBounds {
    pub upper_tail: Option<f64>,
    pub head: Option<f64>,
}

pub fn factorial_tail_bounds(xi: f64, u: f64, v: f64) -> TailBounds {
    TailBounds {
        upper_tail: upper_tail_bound(xi, u).ok(),
        head: head_bound(xi, v).ok(),
    }
}
