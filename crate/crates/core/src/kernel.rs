//! Exact Gaussian transition kernel of the Langevin pair (X_t, U_t) with
//! dX = U dt, dU = sigma dW, and the phase-space density it induces from
//! initial data (s, u0(s)) carrying weight f(s).

use crate::error::{Error, Result};
use crate::plan::{weight_geometry, weight_plan};
use crate::profiles::{DensityProfile, NoiseModel, VelocityProfile};
use crate::quad::{integrate_plan, scan_roots, QuadOptions};
use serde::Serialize;
use std::f64::consts::PI;

/// A point in position-velocity phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub x: f64,
    pub u: f64,
}

/// Covariance data of the transition kernel over a lag t.
#[derive(Debug, Clone, Copy)]
pub struct GaussianKernelParams {
    t: f64,
    sigma: f64,
    pub var_x: f64,
    pub cov_xu: f64,
    pub var_u: f64,
}

impl GaussianKernelParams {
    pub fn new(t: f64, noise: &NoiseModel) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::SingularTime { t });
        }
        let s2 = noise.sigma_sq();
        Ok(GaussianKernelParams {
            t,
            sigma: noise.sigma(),
            var_x: s2 * t * t * t / 3.0,
            cov_xu: s2 * t * t / 2.0,
            var_u: s2 * t,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn det(&self) -> f64 {
        self.var_x * self.var_u - self.cov_xu * self.cov_xu
    }

    /// Density value at the mean: sqrt(3) / (pi sigma^2 t^2).
    pub fn peak_value(&self) -> f64 {
        3f64.sqrt() / (PI * self.sigma * self.sigma * self.t * self.t)
    }
}

/// Transition density from `start` to `end` over the kernel lag.
///
/// The mean path is free flight (x + u t, u); the exponent is the inverse
/// of the covariance [[t^3/3, t^2/2], [t^2/2, t]] scaled by sigma^2.
pub fn transition_density(
    params: &GaussianKernelParams,
    start: PhasePoint,
    end: PhasePoint,
) -> f64 {
    let t = params.t;
    let dx = end.x - start.x - start.u * t;
    let du = end.u - start.u;
    let s2 = params.sigma * params.sigma;
    let q = (6.0 * dx * dx / (t * t * t) - 6.0 * dx * du / (t * t) + 2.0 * du * du / t) / s2;
    params.peak_value() * (-q).exp()
}

/// Same density with the exponent multiplied out into monomials in the raw
/// coordinates. Kept as an independent cross-check of the covariance
/// bookkeeping; agrees with `transition_density` to rounding.
pub fn transition_density_expanded(
    params: &GaussianKernelParams,
    start: PhasePoint,
    end: PhasePoint,
) -> f64 {
    let t = params.t;
    let (s, u0) = (start.x, start.u);
    let (x, u) = (end.x, end.u);
    let s2 = params.sigma * params.sigma;
    let poly =
        3.0 * (x - s) * (x - s) - 3.0 * t * (x - s) * (u0 + u) + t * t * (u * u + u * u0 + u0 * u0);
    let q = 2.0 * poly / (s2 * t * t * t);
    params.peak_value() * (-q).exp()
}

/// Phase-space density p(t, x, u) = (1/Z) \int f(s) G_t((s, u0(s)) -> (x, u)) ds
/// for normalizable f, with Z the total mass of f.
pub fn phase_density(
    t: f64,
    point: PhasePoint,
    f: &DensityProfile,
    v: &VelocityProfile,
    noise: &NoiseModel,
) -> Result<f64> {
    let mass = profile_mass(f)?;
    let params = GaussianKernelParams::new(t, noise)?;
    let geo = weight_geometry(v, noise, t, point.x);
    let u_hints = velocity_match_hints(v, noise, t, point.u);
    let plan = weight_plan(&geo, f, &u_hints, None);
    let opts = QuadOptions::default();
    let integrand =
        |s: f64| f.eval(s) * transition_density(&params, PhasePoint { x: s, u: v.eval(s) }, point);
    let est = integrate_plan(integrand, &plan, &opts)?;
    Ok(est.value / mass)
}

/// x-derivative of `phase_density`, taken analytically inside the
/// integral: d/dx G = -G (12 dx / t^3 - 6 du / t^2) / sigma^2.
pub(crate) fn phase_density_dx(
    t: f64,
    point: PhasePoint,
    f: &DensityProfile,
    v: &VelocityProfile,
    noise: &NoiseModel,
) -> Result<f64> {
    let mass = profile_mass(f)?;
    let params = GaussianKernelParams::new(t, noise)?;
    let geo = weight_geometry(v, noise, t, point.x);
    let u_hints = velocity_match_hints(v, noise, t, point.u);
    let plan = weight_plan(&geo, f, &u_hints, None);
    let opts = QuadOptions::default();
    let s2 = noise.sigma_sq();
    let integrand = |s: f64| {
        let u0 = v.eval(s);
        let start = PhasePoint { x: s, u: u0 };
        let g = transition_density(&params, start, point);
        let dx = point.x - s - u0 * t;
        let du = point.u - u0;
        -g * (12.0 * dx / (t * t * t) - 6.0 * du / (t * t)) / s2 * f.eval(s)
    };
    let est = integrate_plan(integrand, &plan, &opts)?;
    Ok(est.value / mass)
}

/// Position marginal rho(t, x) = (1/Z) \int f(s) phi(x - s - u0(s) t; sigma^2 t^3 / 3) ds.
pub fn marginal_density(
    t: f64,
    x: f64,
    f: &DensityProfile,
    v: &VelocityProfile,
    noise: &NoiseModel,
) -> Result<f64> {
    let mass = profile_mass(f)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::SingularTime { t });
    }
    let var_x = noise.sigma_sq() * t * t * t / 3.0;
    let norm = 1.0 / (2.0 * PI * var_x).sqrt();
    let geo = weight_geometry(v, noise, t, x);
    let plan = weight_plan(&geo, f, &[], None);
    let opts = QuadOptions::default();
    let integrand = |s: f64| {
        let d = x - s - v.eval(s) * t;
        f.eval(s) * norm * (-d * d / (2.0 * var_x)).exp()
    };
    let est = integrate_plan(integrand, &plan, &opts)?;
    Ok(est.value / mass)
}

/// Relative residual of p_t + u p_x = (sigma^2/2) p_uu at one phase point,
/// computed by central differences of `phase_density`. Normalized by the
/// largest term magnitude; returns 0 where all terms vanish.
pub fn fokker_planck_residual(
    t: f64,
    point: PhasePoint,
    f: &DensityProfile,
    v: &VelocityProfile,
    noise: &NoiseModel,
) -> Result<f64> {
    let s2 = noise.sigma_sq();
    let x_scale = match f {
        DensityProfile::Gaussian { r } => (s2 * t * t * t / 3.0).sqrt().min(1.0 / r),
        _ => (s2 * t * t * t / 3.0).sqrt().min(1.0),
    };
    let u_scale = 0.5 * (s2 * t).sqrt();
    let ht = 1e-3 * t;
    let hx = 1e-3 * x_scale;
    let hu = 1e-2 * u_scale;
    let p = |tt: f64, xx: f64, uu: f64| phase_density(tt, PhasePoint { x: xx, u: uu }, f, v, noise);
    let (x, u) = (point.x, point.u);
    let p0 = p(t, x, u)?;
    let dt = (p(t + ht, x, u)? - p(t - ht, x, u)?) / (2.0 * ht);
    let dx = (p(t, x + hx, u)? - p(t, x - hx, u)?) / (2.0 * hx);
    let duu = (p(t, x, u + hu)? - 2.0 * p0 + p(t, x, u - hu)?) / (hu * hu);
    let lhs = dt + u * dx;
    let rhs = 0.5 * s2 * duu;
    let scale = dt.abs().max((u * dx).abs()).max(rhs.abs());
    if scale < 1e-300 {
        return Ok(0.0);
    }
    Ok((lhs - rhs).abs() / scale)
}

/// Total mass of f, erroring for non-normalizable profiles.
pub(crate) fn profile_mass(f: &DensityProfile) -> Result<f64> {
    if let Some(m) = f.mass() {
        return Ok(m);
    }
    if !f.normalizable() {
        return Err(Error::NonNormalizable);
    }
    // normalizable custom profile: integrate numerically
    let plan = weight_plan(
        &crate::plan::WeightGeometry {
            peaks: vec![(0.0, 1.0)],
            flat: false,
        },
        f,
        &[],
        None,
    );
    let est = integrate_plan(|s| f.eval(s), &plan, &QuadOptions::default())?;
    Ok(est.value)
}

fn velocity_match_hints(
    v: &VelocityProfile,
    noise: &NoiseModel,
    t: f64,
    u: f64,
) -> Vec<(f64, f64)> {
    let width = |s: f64| noise.sigma() * t.sqrt() / v.deriv(s).abs().max(1e-12);
    match v {
        VelocityProfile::Linear { alpha } => {
            if *alpha == 0.0 {
                vec![]
            } else {
                let s = u / alpha;
                vec![(s, width(s))]
            }
        }
        VelocityProfile::Custom { .. } => {
            let reach = v.max_abs_on(-50.0, 50.0, 1024);
            let half = 10.0 * (1.0 + u.abs()) + 10.0 * reach;
            scan_roots(|s| v.eval(s) - u, -half, half, 1024)
                .into_iter()
                .map(|s| (s, width(s)))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{DensityProfile, NoiseModel, VelocityProfile};
    use crate::quad::{integrate_plan, DomainPlan, QuadOptions};

    fn noise(sigma: f64) -> NoiseModel {
        NoiseModel::new(sigma).unwrap()
    }

    #[test]
    fn kernel_covariances() {
        let p = GaussianKernelParams::new(2.0, &noise(0.5)).unwrap();
        assert!((p.var_x - 0.25 * 8.0 / 3.0).abs() < 1e-15);
        assert!((p.cov_xu - 0.25 * 4.0 / 2.0).abs() < 1e-15);
        assert!((p.var_u - 0.25 * 2.0).abs() < 1e-15);
        let det_want = 0.0625 * 16.0 / 12.0;
        assert!((p.det() - det_want).abs() < 1e-15);
        // peak = 1 / (2 pi sqrt(det))
        assert!((p.peak_value() - 1.0 / (2.0 * PI * p.det().sqrt())).abs() < 1e-12);
    }

    #[test]
    fn density_peaks_on_free_flight() {
        let p = GaussianKernelParams::new(1.3, &noise(0.8)).unwrap();
        let start = PhasePoint { x: 0.4, u: -1.1 };
        let mean = PhasePoint {
            x: 0.4 - 1.1 * 1.3,
            u: -1.1,
        };
        let at_mean = transition_density(&p, start, mean);
        assert!((at_mean - p.peak_value()).abs() < 1e-12 * at_mean);
        let off = transition_density(
            &p,
            start,
            PhasePoint {
                x: mean.x + 0.3,
                u: mean.u - 0.2,
            },
        );
        assert!(off < at_mean);
    }

    #[test]
    fn expanded_exponent_matches_covariance_form() {
        let p = GaussianKernelParams::new(0.7, &noise(1.4)).unwrap();
        for &(s, u0, x, u) in &[
            (0.0, 0.0, 0.1, -0.2),
            (1.0, -1.0, 0.3, -0.8),
            (-2.0, 2.0, -1.5, 1.1),
            (0.5, -0.25, 0.45, -0.3),
        ] {
            let a = transition_density(&p, PhasePoint { x: s, u: u0 }, PhasePoint { x, u });
            let b =
                transition_density_expanded(&p, PhasePoint { x: s, u: u0 }, PhasePoint { x, u });
            assert!(
                (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300),
                "forms disagree at ({s},{u0})->({x},{u}): {a} vs {b}"
            );
        }
    }

    #[test]
    fn transition_integrates_to_one() {
        let p = GaussianKernelParams::new(0.9, &noise(1.2)).unwrap();
        let start = PhasePoint { x: 0.2, u: 0.7 };
        let (mx, mu) = (start.x + start.u * p.t(), start.u);
        let (sx, su) = (p.var_x.sqrt(), p.var_u.sqrt());
        let opts = QuadOptions::default();
        let inner = |u: f64| {
            let plan = DomainPlan::finite(vec![
                mx - 10.0 * sx,
                mx - 3.0 * sx,
                mx,
                mx + 3.0 * sx,
                mx + 10.0 * sx,
            ]);
            integrate_plan(
                |x| transition_density(&p, start, PhasePoint { x, u }),
                &plan,
                &opts,
            )
            .unwrap()
            .value
        };
        let plan_u = DomainPlan::finite(vec![
            mu - 10.0 * su,
            mu - 3.0 * su,
            mu,
            mu + 3.0 * su,
            mu + 10.0 * su,
        ]);
        let total = integrate_plan(inner, &plan_u, &opts).unwrap().value;
        assert!((total - 1.0).abs() < 1e-8, "mass {total}");
    }

    #[test]
    fn phase_density_recovers_marginal() {
        // integrate p(t,x,u) over u and compare against the direct marginal
        let f = DensityProfile::gaussian(1.0).unwrap();
        let v = VelocityProfile::linear(-0.5);
        let n = noise(1.0);
        let (t, x) = (0.8, 0.6);
        let rho = marginal_density(t, x, &f, &v, &n).unwrap();
        let su = (n.sigma_sq() * t).sqrt();
        // u0 range is O(1) for this profile, so +-12 velocity widths around
        // the fan [-3, 3] covers the support
        let plan = DomainPlan::finite(vec![-3.0 - 12.0 * su, -3.0, 0.0, 3.0, 3.0 + 12.0 * su]);
        let opts = QuadOptions::default();
        let total = integrate_plan(
            |u| phase_density(t, PhasePoint { x, u }, &f, &v, &n).unwrap(),
            &plan,
            &opts,
        )
        .unwrap()
        .value;
        assert!(
            (total - rho).abs() < 1e-8 * rho.max(1.0),
            "u-marginal {total} vs direct {rho}"
        );
    }

    #[test]
    fn marginal_mass_is_conserved() {
        let f = DensityProfile::power_law(-1.5).unwrap();
        let v = VelocityProfile::linear(-1.0);
        let n = noise(0.7);
        for &t in &[0.3, 0.99, 1.0, 1.4] {
            let reach = 60.0;
            let mut pts: Vec<f64> = vec![0.0];
            let mut p = 0.25;
            while p < reach {
                pts.push(p);
                pts.push(-p);
                p *= 2.0;
            }
            pts.push(reach);
            pts.push(-reach);
            pts.sort_by(f64::total_cmp);
            let plan = DomainPlan {
                breakpoints: pts,
                extend_left: true,
                extend_right: true,
            };
            let opts = QuadOptions {
                rel_tol: 1e-9,
                ..QuadOptions::default()
            };
            let total = integrate_plan(
                |x| marginal_density(t, x, &f, &v, &n).unwrap(),
                &plan,
                &opts,
            )
            .unwrap()
            .value;
            assert!((total - 1.0).abs() < 1e-7, "t={t}: mass {total}");
        }
    }

    #[test]
    fn non_normalizable_profiles_are_rejected() {
        let v = VelocityProfile::linear(-1.0);
        let n = noise(1.0);
        let f = DensityProfile::Uniform;
        let err = marginal_density(0.5, 0.0, &f, &v, &n).unwrap_err();
        assert!(matches!(err, Error::NonNormalizable));
        let f = DensityProfile::power_law(0.5).unwrap();
        let err = phase_density(0.5, PhasePoint { x: 0.0, u: 0.0 }, &f, &v, &n).unwrap_err();
        assert!(matches!(err, Error::NonNormalizable));
    }

    #[test]
    fn fokker_planck_residual_is_small_for_gaussian_data() {
        let f = DensityProfile::gaussian(1.0).unwrap();
        let v = VelocityProfile::linear(-1.0);
        let n = noise(1.0);
        for &(t, x, u) in &[(0.5, 0.3, -0.4), (1.0, 0.0, 0.5), (1.5, -0.8, 0.2)] {
            let r = fokker_planck_residual(t, PhasePoint { x, u }, &f, &v, &n).unwrap();
            assert!(r < 1e-3, "t={t} x={x} u={u}: residual {r}");
        }
    }

    #[test]
    fn analytic_density_derivative_matches_finite_difference() {
        let f = DensityProfile::gaussian(1.0).unwrap();
        let v = VelocityProfile::linear(-1.0);
        let n = noise(1.0);
        for &(t, x, u) in &[(0.5, 0.4, -0.3), (1.0, -0.6, 0.2)] {
            let got = phase_density_dx(t, PhasePoint { x, u }, &f, &v, &n).unwrap();
            let h = 1e-5;
            let plus = phase_density(t, PhasePoint { x: x + h, u }, &f, &v, &n).unwrap();
            let minus = phase_density(t, PhasePoint { x: x - h, u }, &f, &v, &n).unwrap();
            let fd = (plus - minus) / (2.0 * h);
            assert!(
                (got - fd).abs() < 1e-6 * got.abs().max(1e-3),
                "t={t} x={x} u={u}: {got} vs {fd}"
            );
        }
    }
}
