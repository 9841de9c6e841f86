//! The smoothing function `phi(mu, x) = sqrt(mu^2 + x^2) - mu` for `|x|`,
//! its componentwise lift, and the diagonal Jacobian ingredients used by the
//! Newton step.

use thiserror::Error;

use crate::linalg::RealVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmoothingError {
    #[error("phi is not differentiable at the origin")]
    DegeneratePoint,
    #[error("smoothing parameter must be positive, got {0}")]
    NonpositiveMu(f64),
}

/// `sqrt(a^2 + b^2)` without intermediate overflow.
#[inline]
fn hypot(a: f64, b: f64) -> f64 {
    let (a, b) = (a.abs(), b.abs());
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    if big == 0.0 {
        return 0.0;
    }
    // Plain evaluation is exact enough and cheaper away from the extremes.
    if big < 1e150 && big > 1e-150 {
        return (a * a + b * b).sqrt();
    }
    let r = small / big;
    big * (1.0 + r * r).sqrt()
}

/// `phi(mu, x) = sqrt(mu^2 + x^2) - mu`; `phi(0, x) = |x|`.
#[inline]
pub fn phi(mu: f64, x: f64) -> f64 {
    if mu == 0.0 {
        return x.abs();
    }
    let r = hypot(mu, x);
    if mu > 0.0 && r > 0.0 {
        // x^2 / (r + mu), free of cancellation when |x| << mu
        x * (x / (r + mu))
    } else {
        r - mu
    }
}

/// Partial derivatives `(d phi / d mu, d phi / d x)`.
pub fn phi_partials(mu: f64, x: f64) -> Result<(f64, f64), SmoothingError> {
    let r = hypot(mu, x);
    if r == 0.0 {
        return Err(SmoothingError::DegeneratePoint);
    }
    Ok((mu / r - 1.0, x / r))
}

/// Componentwise `phi(mu, x_i)`.
pub fn phi_vec(mu: f64, x: &[f64]) -> RealVector {
    RealVector::from_raw(x.iter().map(|&xi| phi(mu, xi)).collect())
}

/// The two diagonal blocks of the smoothed Jacobian at `(mu, x)`:
/// `v1_i = mu / r_i - 1` (coupling with `mu`) and `v2_i = x_i / r_i` (the
/// diagonal added through `B`), where `r_i = sqrt(mu^2 + x_i^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianParts {
    pub mu: f64,
    pub v1: RealVector,
    pub v2_diag: RealVector,
}

pub fn jacobian_parts(mu: f64, x: &[f64]) -> Result<JacobianParts, SmoothingError> {
    if !(mu > 0.0) {
        return Err(SmoothingError::NonpositiveMu(mu));
    }
    let mut v1 = Vec::with_capacity(x.len());
    let mut v2 = Vec::with_capacity(x.len());
    for &xi in x {
        let r = hypot(mu, xi);
        v1.push(mu / r - 1.0);
        v2.push(xi / r);
    }
    Ok(JacobianParts {
        mu,
        v1: RealVector::from_raw(v1),
        v2_diag: RealVector::from_raw(v2),
    })
}
