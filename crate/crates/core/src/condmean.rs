//! Conditional mean velocity of the Langevin-perturbed flow,
//!
//! ```text
//! uhat(t, x) = E[U_t | X_t = x],
//! ```
//!
//! evaluated by quadrature over the initial position s:
//!
//! ```text
//! uhat = N / (2 t D),
//! N = int (-u0(s) t - 3 (s - x)) f(s) w(s) ds,
//! D = int f(s) w(s) ds,
//! w(s) = exp(-3 (u0(s) t + s - x)^2 / (2 sigma^2 t^3)),
//! ```
//!
//! together with the x-derivative obtained by differentiating under the
//! integral sign. Non-normalizable weights f are handled by truncating to
//! [-L, L] and taking the limit L -> infinity along a geometric ladder.

use crate::error::{Error, Result};
use crate::fit::{fit_log_corrected, fit_power_law};
use crate::plan::{weight_geometry, weight_plan};
use crate::profiles::{blowup_time, DensityProfile, NoiseModel, VelocityProfile};
use crate::quad::{integrate_plan, integrate_segments, QuadOptions};
use rayon::prelude::*;
use serde::Serialize;

/// One evaluation of the conditional mean with its diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanFieldSample {
    pub t: f64,
    pub x: f64,
    pub u_hat: f64,
    pub du_hat_dx: f64,
    /// propagated absolute error estimate of the quadratures behind u_hat
    pub quadrature_error: f64,
    pub renormalized: bool,
    pub l_used: Option<f64>,
}

/// Time below which the flow is returned as the initial data itself.
const SHORT_TIME: f64 = 1e-8;

/// Truncation ladder: L = 2^j.
const TRUNC_EXP_RANGE: std::ops::RangeInclusive<i32> = 4..=40;
const LIMIT_TOL: f64 = 1e-8;

/// Evaluate the conditional mean, routing by normalizability of f.
/// Normalizable profiles integrate over the whole line. Non-normalizable
/// ones take the truncation limit: explicitly via the ladder near the
/// critical time (where the weight loses its decay) and directly by
/// open-tail integration elsewhere, falling back to the ladder whenever
/// the tails fail to decay.
pub fn conditional_mean(
    t: f64,
    x: f64,
    f: &DensityProfile,
    v: &VelocityProfile,
    noise: &NoiseModel,
) -> Result<MeanFieldSample> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::SingularTime { t });
    }
    if t < SHORT_TIME {
        return Ok(initial_data_sample(t, x, v));
    }
    if f.normalizable() {
        return assemble(weighted_integrals(t, x, f, v, noise, None)?, t, x, None);
    }
    let t_star = blowup_time(v);
    if t_star.is_finite() && (t - t_star).abs() < 0.01 * t_star {
        return renormalized_mean(t, x, f, v, noise);
    }
    let geo = weight_geometry(v, noise, t, x);
    if geo.flat {
        return renormalized_mean(t, x, f, v, noise);
    }
    match weighted_integrals(t, x, f, v, noise, None) {
        Ok(ints) => assemble(ints, t, x, None),
        Err(Error::DivergentIntegral { .. }) => renormalized_mean(t, x, f, v, noise),
        Err(e) => Err(e),
    }
}

/// Conditional mean with initial positions truncated to [-L, L].
pub fn truncated_mean(
    t: f64,
    x: f64,
    f: &DensityProfile,
    v: &VelocityProfile,
    noise: &NoiseModel,
    l: f64,
) -> Result<MeanFieldSample> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::InvalidParameter {
            name: "l",
            reason: format!("truncation length must be positive and finite, got {l}"),
        });
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::SingularTime { t });
    }
    if t < SHORT_TIME {
        return Ok(initial_data_sample(t, x, v));
    }
    assemble(
        weighted_integrals(t, x, f, v, noise, Some(l))?,
        t,
        x,
        Some(l),
    )
}

/// Limit of `truncated_mean` along L = 2^j, accepted once three successive
/// truncations agree within 1e-8 relative in both value and slope.
pub fn renormalized_mean(
    t: f64,
    x: f64,
    f: &DensityProfile,
    v: &VelocityProfile,
    noise: &NoiseModel,
) -> Result<MeanFieldSample> {
    let mut window: Vec<MeanFieldSample> = Vec::with_capacity(3);
    let mut last_l = 0.0;
    let mut last_delta = f64::INFINITY;
    for j in TRUNC_EXP_RANGE {
        let l = (2f64).powi(j);
        last_l = l;
        let mv = truncated_mean(t, x, f, v, noise, l)?;
        if window.len() == 3 {
            window.remove(0);
        }
        window.push(mv);
        if window.len() == 3 {
            let spread = |pick: fn(&MeanFieldSample) -> f64| {
                let (lo, hi) = window
                    .iter()
                    .map(pick)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    });
                hi - lo
            };
            let spread_v = spread(|m| m.u_hat);
            let spread_s = spread(|m| m.du_hat_dx);
            last_delta = spread_v.max(spread_s);
            let tol_v = LIMIT_TOL * mv.u_hat.abs().max(1.0);
            let tol_s = LIMIT_TOL * mv.du_hat_dx.abs().max(1.0);
            if spread_v <= tol_v && spread_s <= tol_s {
                return Ok(MeanFieldSample {
                    renormalized: true,
                    l_used: Some(l),
                    ..mv
                });
            }
        }
    }
    Err(Error::LimitNotReached { last_l, last_delta })
}

/// Analytic x-derivative next to its central-difference check; the analytic
/// value is authoritative, the difference quotient is a diagnostic.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlopeEstimate {
    pub analytic: f64,
    pub finite_difference: f64,
}

pub fn spatial_derivative(
    t: f64,
    x: f64,
    f: &DensityProfile,
    v: &VelocityProfile,
    noise: &NoiseModel,
) -> Result<SlopeEstimate> {
    let center = conditional_mean(t, x, f, v, noise)?;
    let h = 1e-4 * x.abs().max(1.0);
    let plus = conditional_mean(t, x + h, f, v, noise)?;
    let minus = conditional_mean(t, x - h, f, v, noise)?;
    Ok(SlopeEstimate {
        analytic: center.du_hat_dx,
        finite_difference: (plus.u_hat - minus.u_hat) / (2.0 * h),
    })
}

/// Slope of the conditional mean at the origin sampled along t = T + eps,
/// with power-law and (for k = -1/2) log-corrected rate fits over the last
/// decade of the grid.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupScanResult {
    pub k: f64,
    /// offsets from the critical time, strictly increasing toward 0-
    pub epsilon_grid: Vec<f64>,
    pub slope_at_origin: Vec<f64>,
    /// |slope| ~ fitted_prefactor * (-eps)^(-fitted_exponent)
    pub fitted_exponent: f64,
    pub fitted_prefactor: f64,
    pub fit_max_rel_residual: f64,
    /// slope ~ -c / (eps ln(-eps)): (c, max relative residual); only fitted
    /// at k = -1/2 where that is the predicted model
    pub log_corrected_fit: Option<(f64, f64)>,
    /// per-point failures as (eps, reason), excluded from the fits
    pub failures: Vec<(f64, String)>,
}

/// Default offset grid for blowup scans: eps = -10^(-m/4), m = 4..=28.
pub fn default_eps_grid() -> Vec<f64> {
    (4..=28)
        .rev()
        .map(|m| -10f64.powf(-(m as f64) / 4.0))
        .collect()
}

/// Track the slope at the origin toward the critical time T = -1/alpha for
/// the profile family f = (1+s^2)^k with linear data alpha * s.
pub fn blowup_scan(
    k: f64,
    alpha: f64,
    noise: &NoiseModel,
    eps_grid: &[f64],
) -> Result<BlowupScanResult> {
    if !(alpha < 0.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("scan needs a blowup, so alpha < 0; got {alpha}"),
        });
    }
    let f = DensityProfile::power_law(k)?;
    let v = VelocityProfile::linear(alpha);
    let t_star = -1.0 / alpha;

    let mut eps: Vec<f64> = eps_grid
        .iter()
        .copied()
        .filter(|e| e.is_finite() && *e < 0.0 && t_star + *e > 0.0)
        .collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    if eps.is_empty() {
        return Err(Error::EmptyFit {
            context: "blowup scan offset grid",
        });
    }

    let outcomes: Vec<(f64, Result<MeanFieldSample>)> = eps
        .par_iter()
        .map(|&e| (e, conditional_mean(t_star + e, 0.0, &f, &v, noise)))
        .collect();

    let mut grid = Vec::new();
    let mut slopes = Vec::new();
    let mut failures = Vec::new();
    for (e, outcome) in outcomes {
        match outcome {
            Ok(mv) => {
                grid.push(e);
                slopes.push(mv.du_hat_dx);
            }
            Err(err) => failures.push((e, err.to_string())),
        }
    }
    if grid.len() < 2 {
        return Err(Error::EmptyFit {
            context: "blowup scan produced fewer than two usable points",
        });
    }

    // fit over the last decade toward eps = 0-
    let closest = grid.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
    let window: Vec<usize> = (0..grid.len())
        .filter(|&i| grid[i].abs() <= 10.0 * closest * (1.0 + 1e-12))
        .collect();
    let we: Vec<f64> = window.iter().map(|&i| grid[i]).collect();
    let ws: Vec<f64> = window.iter().map(|&i| slopes[i]).collect();
    let power = fit_power_law(&we, &ws)?;
    let log_corrected_fit = if k == -0.5 {
        let lf = fit_log_corrected(&we, &ws)?;
        Some((lf.prefactor, lf.max_rel_residual))
    } else {
        None
    };

    Ok(BlowupScanResult {
        k,
        epsilon_grid: grid,
        slope_at_origin: slopes,
        fitted_exponent: power.exponent,
        fitted_prefactor: power.prefactor,
        fit_max_rel_residual: power.max_rel_residual,
        log_corrected_fit,
        failures,
    })
}

fn initial_data_sample(t: f64, x: f64, v: &VelocityProfile) -> MeanFieldSample {
    MeanFieldSample {
        t,
        x,
        u_hat: v.eval(x),
        du_hat_dx: v.deriv(x),
        quadrature_error: 0.0,
        renormalized: false,
        l_used: None,
    }
}

struct Integrals {
    d: f64,
    n: f64,
    dx: f64,
    nx: f64,
    d_err: f64,
    n_err: f64,
}

fn assemble(ints: Integrals, t: f64, x: f64, l: Option<f64>) -> Result<MeanFieldSample> {
    let Integrals {
        d,
        n,
        dx,
        nx,
        d_err,
        n_err,
    } = ints;
    if d <= 0.0 || !d.is_finite() {
        return Err(Error::NotFinite {
            context: format!("weight integral d = {d}"),
        });
    }
    let u_hat = n / (2.0 * t * d);
    let du_hat_dx = (nx * d - n * dx) / (2.0 * t * d * d);
    if !u_hat.is_finite() || !du_hat_dx.is_finite() {
        return Err(Error::NotFinite {
            context: format!("conditional mean value {u_hat}, slope {du_hat_dx}"),
        });
    }
    let quadrature_error = (n_err + u_hat.abs() * 2.0 * t * d_err) / (2.0 * t * d);
    Ok(MeanFieldSample {
        t,
        x,
        u_hat,
        du_hat_dx,
        quadrature_error,
        renormalized: false,
        l_used: l,
    })
}

/// The four s-integrals behind the value and slope: weight integral D,
/// numerator N, and their x-derivatives via d/dx w = (3 g / sigma^2 t^3) w
/// with g = u0(s) t + s - x.
fn weighted_integrals(
    t: f64,
    x: f64,
    f: &DensityProfile,
    v: &VelocityProfile,
    noise: &NoiseModel,
    trunc: Option<f64>,
) -> Result<Integrals> {
    let c3 = 3.0 / (noise.sigma_sq() * t * t * t);
    let geo = weight_geometry(v, noise, t, x);
    let plan = weight_plan(&geo, f, &[], trunc);
    let opts = QuadOptions::default();
    // For linear data the weight argument u0(s) t + s - x is (1 + alpha t) s - x.
    // Evaluated term by term the two O(s) pieces cancel, and near the critical
    // time the rounding residue of that cancellation swamps the O(eps s) value,
    // so factor the coefficient once and keep the integrand smooth.
    let lin_factor = match v {
        VelocityProfile::Linear { alpha } => Some(1.0 + alpha * t),
        VelocityProfile::Custom { .. } => None,
    };
    let mut parts = [(0.0f64, 0.0f64); 4];
    for (idx, part) in parts.iter_mut().enumerate() {
        let integrand = move |s: f64| {
            let u0 = v.eval(s);
            let g = match lin_factor {
                Some(a) => a * s - x,
                None => u0 * t + s - x,
            };
            let w = (-0.5 * c3 * g * g).exp();
            let fw = f.eval(s) * w;
            let num = -u0 * t - 3.0 * (s - x);
            match idx {
                0 => fw,
                1 => num * fw,
                2 => c3 * g * fw,
                _ => (3.0 + num * c3 * g) * fw,
            }
        };
        let est = integrate_plan(integrand, &plan, &opts)?;
        *part = (est.value, est.abs_error);
    }
    Ok(Integrals {
        d: parts[0].0,
        n: parts[1].0,
        dx: parts[2].0,
        nx: parts[3].0,
        d_err: parts[0].1,
        n_err: parts[1].1,
    })
}

/// Numerator and weight integrals alone, for position-binned averages of
/// the mean: over a bin, E[U | X in bin] = (int N dx) / (2 t int D dx).
pub(crate) fn numerator_and_weight(
    t: f64,
    x: f64,
    f: &DensityProfile,
    v: &VelocityProfile,
    noise: &NoiseModel,
    trunc: Option<f64>,
) -> Result<(f64, f64)> {
    let ints = weighted_integrals(t, x, f, v, noise, trunc)?;
    Ok((ints.n, ints.d))
}

/// Average of the conditional mean over a position bin,
/// E[U | X in bin] = (int_bin N dx) / (2 t int_bin D dx): the quantity a
/// histogram estimator of the mean actually measures.
pub fn bin_averaged_mean(
    t: f64,
    x_lo: f64,
    x_hi: f64,
    f: &DensityProfile,
    v: &VelocityProfile,
    noise: &NoiseModel,
    trunc: Option<f64>,
) -> Result<f64> {
    if !(x_hi > x_lo) || !x_lo.is_finite() || !x_hi.is_finite() {
        return Err(Error::InvalidParameter {
            name: "bin",
            reason: format!("need x_lo < x_hi finite, got [{x_lo}, {x_hi}]"),
        });
    }
    if !t.is_finite() || t < SHORT_TIME {
        return Err(Error::SingularTime { t });
    }
    let opts = QuadOptions::default();
    let bounds = [x_lo, 0.5 * (x_lo + x_hi), x_hi];
    let numer = integrate_segments(
        |x| match numerator_and_weight(t, x, f, v, noise, trunc) {
            Ok((n, _)) => n,
            Err(_) => f64::NAN,
        },
        &bounds,
        &opts,
    )?;
    let denom = integrate_segments(
        |x| match numerator_and_weight(t, x, f, v, noise, trunc) {
            Ok((_, d)) => d,
            Err(_) => f64::NAN,
        },
        &bounds,
        &opts,
    )?;
    if denom.value <= 0.0 || !denom.value.is_finite() {
        return Err(Error::NotFinite {
            context: format!("bin weight integral {}", denom.value),
        });
    }
    Ok(numer.value / (2.0 * t * denom.value))
}
