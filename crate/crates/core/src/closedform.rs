//! Closed-form conditional means for the exactly solvable configurations.
//!
//! Linear initial velocity u0 = alpha x admits exact formulas both for the
//! noiseless flow and for the noisy conditional mean with uniform or Gaussian
//! initial mass. These are the oracles the quadrature paths are checked
//! against.

use crate::error::{Error, Result};

/// Noiseless solution for linear data: u(t,x) = alpha x / (1 + alpha t).
/// Singular at t = -1/alpha (gradient blowup for alpha < 0).
pub fn burgers_linear(alpha: f64, t: f64, x: f64) -> Result<f64> {
    let denom = 1.0 + alpha * t;
    if denom == 0.0 {
        return Err(Error::SingularTime { t });
    }
    Ok(alpha * x / denom)
}

/// Conditional mean for uniform initial mass and linear data. Coincides with
/// the noiseless solution and carries no dependence on the noise level.
pub fn uniform_mean(alpha: f64, t: f64, x: f64) -> Result<f64> {
    burgers_linear(alpha, t, x)
}

/// Conditional mean for Gaussian initial mass (r/sqrt(pi)) exp(-r^2 x^2) and
/// linear data:
///
/// ```text
/// u(t,x) = 3 (alpha (alpha t + 1) + r^2 sigma^2 t^2) x
///          ---------------------------------------------
///          3 (alpha t + 1)^2 + 2 r^2 sigma^2 t^3
/// ```
///
/// Regular through the critical time; at t = -1/alpha it equals
/// -(3/2) alpha x.
pub fn gaussian_mean(alpha: f64, r: f64, sigma: f64, t: f64, x: f64) -> Result<f64> {
    Ok(gaussian_mean_slope(alpha, r, sigma, t)? * x)
}

/// Spatial slope of the Gaussian-mass conditional mean (it is linear in x).
pub fn gaussian_mean_slope(alpha: f64, r: f64, sigma: f64, t: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: format!("Gaussian width parameter must be positive, got {r}"),
        });
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("noise level must be positive, got {sigma}"),
        });
    }
    let a = alpha * t + 1.0;
    let c = r * r * sigma * sigma;
    let denom = 3.0 * a * a + 2.0 * c * t * t * t;
    if denom == 0.0 {
        return Err(Error::SingularTime { t });
    }
    Ok(3.0 * (alpha * a + c * t * t) / denom)
}
