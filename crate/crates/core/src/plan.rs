//! Builds quadrature domain plans around the Gaussian weight
//! exp(-3 (u0(s) t + s - x)^2 / (2 sigma^2 t^3)).
//!
//! The weight peaks at roots of u0(s) t + s - x and has local width
//! sigma t^{3/2} / (sqrt(3) |1 + t u0'(s)|); near the critical time the
//! derivative factor collapses and the peak widens by orders of magnitude,
//! so plans are assembled from peak ladders, profile breakpoints, and
//! geometric fill between scale clusters.

use crate::profiles::{DensityProfile, NoiseModel, VelocityProfile};
use crate::quad::{assemble_breakpoints, scan_roots, DomainPlan};

#[derive(Debug, Clone)]
pub(crate) struct WeightGeometry {
    /// (center, width) of each weight peak in s
    pub peaks: Vec<(f64, f64)>,
    /// true when the weight has no decay in s (degenerate critical slice)
    pub flat: bool,
}

const WIDTH_LADDER: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 12.0];

pub(crate) fn weight_geometry(
    v: &VelocityProfile,
    noise: &NoiseModel,
    t: f64,
    x: f64,
) -> WeightGeometry {
    let base_width = noise.sigma() * t.powf(1.5) / 3f64.sqrt();
    let width_at = |s: f64| {
        let dg = 1.0 + t * v.deriv(s);
        base_width / dg.abs().max(1e-12)
    };
    match v {
        VelocityProfile::Linear { alpha } => {
            let a = 1.0 + alpha * t;
            if a == 0.0 {
                WeightGeometry {
                    peaks: vec![],
                    flat: true,
                }
            } else {
                let s = x / a;
                WeightGeometry {
                    peaks: vec![(s, base_width / a.abs())],
                    flat: false,
                }
            }
        }
        VelocityProfile::Custom { .. } => {
            let reach = v.max_abs_on(-50.0, 50.0, 1024);
            let lo = x - 10.0 * (1.0 + x.abs()) - 10.0 * t * reach;
            let hi = x + 10.0 * (1.0 + x.abs()) + 10.0 * t * reach;
            let g = |s: f64| v.eval(s) * t + s - x;
            let roots = scan_roots(g, lo, hi, 2048);
            if roots.is_empty() {
                // no exact peak: anchor segments at the flattest probe point
                let n = 512;
                let h = (hi - lo) / n as f64;
                let s_min = (0..=n)
                    .map(|i| lo + h * i as f64)
                    .min_by(|a, b| g(*a).abs().total_cmp(&g(*b).abs()))
                    .unwrap_or(x);
                WeightGeometry {
                    peaks: vec![(s_min, width_at(s_min))],
                    flat: false,
                }
            } else {
                WeightGeometry {
                    peaks: roots.iter().map(|&s| (s, width_at(s))).collect(),
                    flat: false,
                }
            }
        }
    }
}

/// Domain plan for s-integrals weighted by the marginal Gaussian factor.
/// `trunc = Some(L)` restricts to [-L, L] (closed); `None` leaves open tails.
pub(crate) fn weight_plan(
    geometry: &WeightGeometry,
    f: &DensityProfile,
    extra_hints: &[(f64, f64)],
    trunc: Option<f64>,
) -> DomainPlan {
    let mut pts: Vec<f64> = Vec::new();
    for &(c, w) in geometry.peaks.iter().chain(extra_hints) {
        pts.push(c);
        for m in WIDTH_LADDER {
            pts.push(c - m * w);
            pts.push(c + m * w);
        }
    }
    pts.extend(f.scale_breakpoints());
    pts.push(0.0);
    let (lo, hi, open) = match trunc {
        Some(l) => (-l, l, false),
        None => {
            let reach = pts
                .iter()
                .filter(|p| p.is_finite())
                .fold(1.0f64, |m, p| m.max(p.abs()));
            (-2.0 * reach, 2.0 * reach, true)
        }
    };
    let mut bounds = assemble_breakpoints(pts, lo, hi);
    bounds = geometric_fill(bounds);
    DomainPlan {
        breakpoints: bounds,
        extend_left: open,
        extend_right: open,
    }
}

/// Insert geometric intermediate points where adjacent breakpoints differ by
/// more than 4x in magnitude, so no panel spans many scale decades.
fn geometric_fill(bounds: Vec<f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(bounds.len() * 2);
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        out.push(a);
        let floor = 1e-300;
        if a > floor {
            let mut p = a * 4.0;
            while p < b / 2.0 {
                out.push(p);
                p *= 4.0;
            }
        } else if b < -floor {
            let mut p = b * 4.0;
            let mut stack = Vec::new();
            while p > a / 2.0 {
                stack.push(p);
                p *= 4.0;
            }
            out.extend(stack.into_iter().rev());
        } else if a.abs() <= 1.0 && b.abs() <= 1.0 {
            // both ends near zero; fine as is
        } else {
            // panel straddles zero with large ends: cut at +-1
            if a < -1.0 {
                out.push(-1.0);
            }
            if b > 1.0 {
                out.push(1.0);
            }
        }
    }
    if let Some(last) = bounds.last() {
        out.push(*last);
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= f64::EPSILON * 4.0 * a.abs().max(1.0));
    out
}
