//! Behavior of the conditional-mean slope at the critical time of the
//! underlying classical flow, for the weight family f(s) = (1 + s^2)^k
//! with linear data alpha s (alpha < 0).
//!
//! The slope at the origin approaches the critical time in one of four
//! ways depending on k, with rate constants assembled from a fixed set of
//! coefficients A1..A5. Several of those coefficients carry trigonometric
//! and gamma factors that pass through poles at half-integer and negative
//! integer k; at such k the values reported here are two-sided averages
//! at k -+ 1e-6 and are flagged as such. Rate constants near a pole are
//! averaged as ratios, never as ratios of averaged parts: the finite
//! parts of two simple poles generally have the wrong quotient.

use crate::error::{Error, Result};
use crate::profiles::{DensityProfile, NoiseModel, VelocityProfile};
use crate::quad::{integrate_plan, scan_roots, DomainPlan, QuadOptions};
use crate::special::{gamma, gamma_recip, laguerre_at_zero};
use serde::Serialize;
use std::f64::consts::PI;

/// The rate coefficients at one (k, alpha, sigma).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoefficientSet {
    pub k: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    /// limit constant of the borderline profile k = -1/2
    pub abar1: f64,
    pub a5: f64,
    /// true when k sits on a pole and the values are two-sided averages
    pub averaged_near_pole: bool,
}

fn check_family(k: f64, alpha: f64) -> Result<()> {
    if !k.is_finite() {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: format!("profile exponent must be finite, got {k}"),
        });
    }
    if !(alpha < 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("critical-time analysis needs alpha < 0, got {alpha}"),
        });
    }
    Ok(())
}

/// Detect k on (or numerically at) a pole of the coefficient formulas:
/// half-odd-integer k (cosine and tangent poles) and integer k <= -1
/// (gamma poles and the explicit 1/(k+1), 1/(k+2) factors).
fn near_singular(k: f64) -> bool {
    let twice = (2.0 * k).round();
    let near_half_odd = (2.0 * k - twice).abs() < 2e-9 && (twice as i64).rem_euclid(2) == 1;
    let nearest = k.round();
    let near_neg_int = (k - nearest).abs() < 1e-9 && nearest <= -1.0 + 0.5;
    near_half_odd || near_neg_int
}

/// Literal evaluation of the printed coefficient formulas; poles surface
/// as non-finite entries.
fn raw_coefficients(k: f64, aa: f64, sigma: f64) -> [f64; 4] {
    let cos_pik = (PI * k).cos();
    let tan_pik = (PI * k).tan();
    // L_k^{1/2 - k}(0) and L_{1/2}^{k + 1/2}(0)
    let l_a = laguerre_at_zero(k, 0.5 - k);
    let l_b = laguerre_at_zero(0.5, k + 0.5);
    let shared = PI * PI * sigma.powf(2.0 * k) / (3f64.powf(k) * aa.powf(5.0 * k + 1.0));
    let a1 = shared * 2f64.powf(k + 2.0) * (4.0 * k * k - 1.0) / cos_pik * gamma(k + 1.0) * l_a;
    let a2 = 3.0 * 6f64.sqrt() * (PI * aa).powf(2.5) / (2.0 * sigma * (k + 1.0)) * tan_pik * l_b;
    let a3 = shared * 2f64.powf(k + 1.0) * (2.0 * k - 1.0) / ((k + 1.0) * (k + 2.0) * cos_pik)
        * gamma(k + 3.0)
        * l_a;
    let a4 = 6f64.sqrt() * PI * PI * aa.powf(1.5) * (2.0 * k + 3.0) * gamma(k + 3.0)
        / (sigma * (k + 1.0) * (k + 2.0))
        * gamma_recip(k + 2.5)
        * tan_pik;
    [a1, a2, a3, a4]
}

const POLE_OFFSET: f64 = 1e-6;

pub fn coefficients(k: f64, alpha: f64, noise: &NoiseModel) -> Result<CoefficientSet> {
    check_family(k, alpha)?;
    let aa = alpha.abs();
    let sigma = noise.sigma();
    let abar1 = 4.0 * 6f64.sqrt() * (PI * aa).powf(1.5) / sigma;
    let averaged = near_singular(k);
    let a = if averaged {
        let lo = raw_coefficients(k - POLE_OFFSET, aa, sigma);
        let hi = raw_coefficients(k + POLE_OFFSET, aa, sigma);
        [
            0.5 * (lo[0] + hi[0]),
            0.5 * (lo[1] + hi[1]),
            0.5 * (lo[2] + hi[2]),
            0.5 * (lo[3] + hi[3]),
        ]
    } else {
        raw_coefficients(k, aa, sigma)
    };
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Pole {
            factor: "rate coefficient",
            k,
        });
    }
    Ok(CoefficientSet {
        k,
        alpha,
        sigma,
        a1: a[0],
        a2: a[1],
        a3: a[2],
        a4: a[3],
        abar1,
        a5: -abar1,
        averaged_near_pole: averaged,
    })
}

/// Ratio of two coefficients, averaged as a ratio across a pole.
fn coefficient_ratio(k: f64, aa: f64, sigma: f64, num: usize, den: usize) -> Result<f64> {
    let ratio_at = |kk: f64| {
        let a = raw_coefficients(kk, aa, sigma);
        a[num] / a[den]
    };
    let r = if near_singular(k) {
        0.5 * (ratio_at(k - POLE_OFFSET) + ratio_at(k + POLE_OFFSET))
    } else {
        ratio_at(k)
    };
    if !r.is_finite() {
        return Err(Error::Pole {
            factor: "rate constant",
            k,
        });
    }
    Ok(r)
}

/// How the slope at the origin behaves as t -> T from below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    /// slope stays bounded; it tends to `limit_slope` at the critical time
    Suppressed { limit_slope: f64 },
    /// |slope| ~ prefactor * (-eps)^(-exponent) with exponent in (0, 1)
    Algebraic { exponent: f64, prefactor: f64 },
    /// |slope| ~ const / ((-eps) ln(1/-eps)): the borderline profile
    LogCorrected,
    /// |slope| ~ b3 related constant / (-eps): perturbation does not help
    LinearRate { b3: f64 },
}

/// Tolerance for recognizing the distinguished k values exactly.
const K_EDGE: f64 = 1e-9;

pub fn classify_regime(k: f64, alpha: f64, noise: &NoiseModel) -> Result<Regime> {
    check_family(k, alpha)?;
    let aa = alpha.abs();
    let sigma = noise.sigma();
    if k < -1.0 - K_EDGE {
        // a2 / a4 collapses to 3|alpha|/2 for every such k
        let limit_slope = coefficient_ratio(k, aa, sigma, 1, 3)?;
        return Ok(Regime::Suppressed { limit_slope });
    }
    if (k + 1.0).abs() <= K_EDGE {
        let limit_slope = 1.5 * aa - 6f64.sqrt() * aa.powf(2.5) / (sigma * PI.sqrt());
        return Ok(Regime::Suppressed { limit_slope });
    }
    if (k + 0.5).abs() <= K_EDGE {
        return Ok(Regime::LogCorrected);
    }
    if k < -0.5 {
        return Ok(Regime::Algebraic {
            exponent: 2.0 * (k + 1.0),
            prefactor: coefficient_ratio(k, aa, sigma, 0, 3)?,
        });
    }
    Ok(Regime::LinearRate { b3: 2.0 * k + 1.0 })
}

pub fn predicted_rate_description(regime: &Regime) -> String {
    match regime {
        Regime::Suppressed { limit_slope } => {
            format!("slope stays bounded through the critical time and approaches {limit_slope:.6}")
        }
        Regime::Algebraic {
            exponent,
            prefactor,
        } => format!("slope grows like (-eps)^(-{exponent:.4}) with rate constant {prefactor:.6}"),
        Regime::LogCorrected => {
            "slope grows like 1/((-eps) ln(1/(-eps))), the borderline rate".to_string()
        }
        Regime::LinearRate { b3 } => {
            format!("slope grows at the classical 1/(-eps) rate (printed constant {b3:.4})")
        }
    }
}

/// Slope of the conditional mean at the origin at the focusing time
/// t0 = -1/beta of data with local decay rate beta, computed directly as
/// a ratio of stationary integrals instead of through the x-derivative
/// quadrature:
///
/// ```text
/// slope = -(3 beta / (2 sigma^2)) [I1/I0 + I2 I3 / I0^2],
/// E(s)  = exp((3 beta / (2 sigma^2)) (u0(s) - beta s)^2),
/// I0 = int f E,
/// I1 = int (sigma^2 - 4 beta^2 s u0 + 3 s^2 beta^3 + beta u0^2) f E,
/// I2 = int (beta s - u0) f E,
/// I3 = int (3 beta s - u0) f E.
/// ```
pub fn focusing_slope(
    beta: f64,
    f: &DensityProfile,
    v: &VelocityProfile,
    noise: &NoiseModel,
) -> Result<f64> {
    if !(beta < 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("focusing needs beta < 0, got {beta}"),
        });
    }
    let s2 = noise.sigma_sq();
    let c_e = 3.0 * beta / (2.0 * s2);
    let h = |s: f64| v.eval(s) - beta * s;

    if !f.normalizable() {
        let flat = (-8..=8).all(|i| h(i as f64).abs() < 1e-12);
        if flat {
            return Err(Error::DivergentIntegral {
                context: "focusing weight is flat and the profile has no decay",
            });
        }
    }

    // concentrate panels where the weight E peaks: the zeros of h
    let mut roots = scan_roots(h, -64.0, 64.0, 4096);
    if roots.is_empty() {
        roots.push(0.0);
    }
    let mut pts = vec![0.0];
    for &r0 in &roots {
        let dh = (v.deriv(r0) - beta).abs().max(1e-6);
        let w = noise.sigma() / ((3.0 * beta.abs()).sqrt() * dh);
        pts.push(r0);
        for m in [1.0, 2.0, 4.0, 8.0, 12.0] {
            pts.push(r0 - m * w);
            pts.push(r0 + m * w);
        }
    }
    pts.extend(f.scale_breakpoints());
    pts.retain(|p| p.is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let plan = DomainPlan::open(pts);
    let opts = QuadOptions::default();

    let weighted = |g: &dyn Fn(f64, f64) -> f64| -> Result<f64> {
        let integrand = |s: f64| {
            let hs = h(s);
            let e = (c_e * hs * hs).exp();
            g(s, v.eval(s)) * f.eval(s) * e
        };
        Ok(integrate_plan(integrand, &plan, &opts)?.value)
    };

    let i0 = weighted(&|_, _| 1.0)?;
    if !(i0 > 0.0) || !i0.is_finite() {
        return Err(Error::NotFinite {
            context: format!("focusing weight integral {i0}"),
        });
    }
    let i1 = weighted(&|s, u0| {
        s2 - 4.0 * beta * beta * s * u0 + 3.0 * s * s * beta.powi(3) + beta * u0 * u0
    })?;
    let i2 = weighted(&|s, u0| beta * s - u0)?;
    let i3 = weighted(&|s, u0| 3.0 * beta * s - u0)?;
    Ok(-c_e * (i1 / i0 + i2 * i3 / (i0 * i0)))
}
