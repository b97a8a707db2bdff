//! The vanishing-noise limit and the hydrodynamic bookkeeping around it.
//!
//! As sigma -> 0 the conditional mean collapses onto the classical
//! characteristics solution v(t, x) = u0(s) with s + t u0(s) = x. At
//! finite sigma the pair (rho, uhat) of position marginal and conditional
//! mean satisfies the continuity equation exactly, while the momentum
//! flux picks up a relaxation term
//!
//! ```text
//! Lambda(t, x) = -int P_x(t, x, u) (u - uhat)^2 du,
//! d_t(rho uhat) + d_x(rho uhat^2) = Lambda,
//! ```
//!
//! which this module evaluates by quadrature and checks by finite
//! differences, together with kinetic-equation diagnostics for the
//! effective acceleration felt by a particle at (x, u).

use crate::burgers::{solve_characteristics, Characteristics};
use crate::condmean::conditional_mean;
use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::kernel::{marginal_density, phase_density, phase_density_dx, PhasePoint};
use crate::plan::weight_geometry;
use crate::profiles::{DensityProfile, NoiseModel, VelocityProfile};
use crate::quad::{integrate_plan, DomainPlan, QuadOptions};
use serde::Serialize;

/// Classical limit value v(t, x): the velocity carried by the unique
/// characteristic through (t, x).
pub fn vanishing_noise_mean(v: &VelocityProfile, t: f64, x: f64) -> Result<f64> {
    match solve_characteristics(v, t, x)? {
        Characteristics::Unique { u, .. } => Ok(u),
        Characteristics::MultiRoot { count } => Err(Error::MultiRoot { count }),
        Characteristics::NoRoot => Err(Error::NoRoot),
    }
}

/// Gap |uhat(sigma) - v| along a decreasing noise sequence.
#[derive(Debug, Clone, Serialize)]
pub struct SigmaConvergence {
    /// (sigma, gap) pairs in input order
    pub steps: Vec<(f64, f64)>,
    /// slope of log gap against log sigma over the resolved entries
    pub fitted_order: f64,
}

/// Quadrature floor below which gaps are treated as converged noise.
const GAP_FLOOR: f64 = 1e-8;

pub fn sigma_convergence(
    f: &DensityProfile,
    v: &VelocityProfile,
    t: f64,
    x: f64,
    sigma_seq: &[f64],
) -> Result<SigmaConvergence> {
    let limit = vanishing_noise_mean(v, t, x)?;
    let mut steps = Vec::with_capacity(sigma_seq.len());
    for &sigma in sigma_seq {
        let noise = NoiseModel::new(sigma)?;
        let mv = conditional_mean(t, x, f, v, &noise)?;
        steps.push((sigma, (mv.u_hat - limit).abs()));
    }
    let resolved: Vec<(f64, f64)> = steps
        .iter()
        .copied()
        .filter(|(_, gap)| *gap > GAP_FLOOR)
        .collect();
    if resolved.len() < 2 {
        return Err(Error::EmptyFit {
            context: "noise convergence sequence entirely below the quadrature floor",
        });
    }
    let xs: Vec<f64> = resolved.iter().map(|(s, _)| s.ln()).collect();
    let ys: Vec<f64> = resolved.iter().map(|(_, g)| g.ln()).collect();
    let line = fit_line(&xs, &ys)?;
    Ok(SigmaConvergence {
        steps,
        fitted_order: line.slope,
    })
}

/// The relaxation term Lambda(t, x) = -int P_x (u - uhat)^2 du, with the
/// x-derivative of the phase density taken analytically inside its own
/// integral.
pub fn lambda_term(
    t: f64,
    x: f64,
    f: &DensityProfile,
    v: &VelocityProfile,
    noise: &NoiseModel,
) -> Result<f64> {
    let u_hat = conditional_mean(t, x, f, v, noise)?.u_hat;
    // panels around the velocities carried into x: along each incoming
    // packet the u-spread is the kernel spread plus the swept data range
    let geo = weight_geometry(v, noise, t, x);
    let base = noise.sigma() * t.sqrt();
    let mut pts = vec![0.0, u_hat];
    for &(center, width) in &geo.peaks {
        let u0 = v.eval(center);
        let spread = base + v.deriv(center).abs() * width;
        for m in [1.0, 2.0, 4.0, 8.0, 12.0] {
            pts.push(u0 - m * spread);
            pts.push(u0 + m * spread);
        }
        pts.push(u0);
    }
    pts.retain(|p| p.is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let plan = DomainPlan::open(pts);
    let opts = QuadOptions::default();
    let integrand = |u: f64| {
        let px = phase_density_dx(t, PhasePoint { x, u }, f, v, noise).unwrap_or(f64::NAN);
        let d = u - u_hat;
        -px * d * d
    };
    Ok(integrate_plan(integrand, &plan, &opts)?.value)
}

/// Normalized residual of d_t(rho uhat) + d_x(rho uhat^2) = Lambda by
/// central differences at fixed relative steps.
pub fn momentum_residual(
    t: f64,
    x: f64,
    f: &DensityProfile,
    v: &VelocityProfile,
    noise: &NoiseModel,
) -> Result<f64> {
    let ht = 1e-4 * t;
    let hx = 1e-4 * x.abs().max(1.0);
    let flux = |tt: f64, xx: f64| -> Result<(f64, f64)> {
        let rho = marginal_density(tt, xx, f, v, noise)?;
        let m = conditional_mean(tt, xx, f, v, noise)?;
        Ok((rho * m.u_hat, rho * m.u_hat * m.u_hat))
    };
    let d_t = (flux(t + ht, x)?.0 - flux(t - ht, x)?.0) / (2.0 * ht);
    let d_x = (flux(t, x + hx)?.1 - flux(t, x - hx)?.1) / (2.0 * hx);
    let lam = lambda_term(t, x, f, v, noise)?;
    let scale = d_t.abs().max(d_x.abs()).max(lam.abs()).max(1e-12);
    Ok((d_t + d_x - lam).abs() / scale)
}

/// Normalized residual of the continuity equation d_t rho + d_x(rho uhat)
/// by central differences.
pub fn continuity_residual(
    t: f64,
    x: f64,
    f: &DensityProfile,
    v: &VelocityProfile,
    noise: &NoiseModel,
) -> Result<f64> {
    let ht = 1e-4 * t;
    let hx = 1e-4 * x.abs().max(1.0);
    let d_t = (marginal_density(t + ht, x, f, v, noise)?
        - marginal_density(t - ht, x, f, v, noise)?)
        / (2.0 * ht);
    let flux = |xx: f64| -> Result<f64> {
        Ok(marginal_density(t, xx, f, v, noise)? * conditional_mean(t, xx, f, v, noise)?.u_hat)
    };
    let d_x = (flux(x + hx)? - flux(x - hx)?) / (2.0 * hx);
    let scale = d_t.abs().max(d_x.abs()).max(1e-12);
    Ok((d_t + d_x).abs() / scale)
}

/// Residuals of the kinetic transport equation at one phase point under
/// three candidate acceleration fields, next to the transport-diffusion
/// residual of the density itself. Each entry is
/// |d_t P + u d_x P + d_u(a P)| normalized by the largest term.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KineticReport {
    /// a = 2 (uhat - u) / t: drift toward the conditional mean
    pub relaxation_residual: f64,
    /// a = 2 (u - uhat) / t: drift away from the conditional mean
    pub dispersion_residual: f64,
    /// a = -(sigma^2 / 2) d_u ln P: the exact diffusion-flux velocity
    pub score_residual: f64,
    /// residual of d_t P + u d_x P = (sigma^2 / 2) d_uu P at the point
    pub fokker_planck: f64,
}

pub fn kinetic_acceleration_check(
    t: f64,
    x: f64,
    u: f64,
    f: &DensityProfile,
    v: &VelocityProfile,
    noise: &NoiseModel,
) -> Result<KineticReport> {
    let s2 = noise.sigma_sq();
    let u_hat = conditional_mean(t, x, f, v, noise)?.u_hat;
    let ht = 1e-3 * t;
    let hx = 1e-3 * x.abs().max(1.0);
    let hu = 5e-3 * noise.sigma() * t.sqrt();
    let p = |tt: f64, xx: f64, uu: f64| phase_density(tt, PhasePoint { x: xx, u: uu }, f, v, noise);
    let p0 = p(t, x, u)?;
    let p_up = p(t, x, u + hu)?;
    let p_dn = p(t, x, u - hu)?;
    let d_t = (p(t + ht, x, u)? - p(t - ht, x, u)?) / (2.0 * ht);
    let d_x = u * (p(t, x + hx, u)? - p(t, x - hx, u)?) / (2.0 * hx);
    // flux derivatives for the two mean-relative drifts, and the exact
    // second-order form for the score drift
    let toward = |w: f64| 2.0 * (u_hat - w) / t;
    let d_flux_toward = (toward(u + hu) * p_up - toward(u - hu) * p_dn) / (2.0 * hu);
    let d_flux_score = -0.5 * s2 * (p_up - 2.0 * p0 + p_dn) / (hu * hu);
    let residual = |flux_term: f64| {
        let scale = d_t.abs().max(d_x.abs()).max(flux_term.abs());
        if scale < 1e-300 {
            0.0
        } else {
            (d_t + d_x + flux_term).abs() / scale
        }
    };
    Ok(KineticReport {
        relaxation_residual: residual(d_flux_toward),
        dispersion_residual: residual(-d_flux_toward),
        score_residual: residual(d_flux_score),
        fokker_planck: crate::kernel::fokker_planck_residual(t, PhasePoint { x, u }, f, v, noise)?,
    })
}
