//! Characteristics of the noiseless flow.
//!
//! A fluid particle starting at s moves with constant speed u0(s), so the
//! state at (t, x) is read off from roots of s + t u0(s) = x. Before the
//! first crossing time the root is unique and the map s -> s + t u0(s) is
//! orientation preserving; afterwards the solution is multivalued (or the
//! fan has folded through itself) and the outcome reports that.

use crate::error::{Error, Result};
use crate::profiles::VelocityProfile;
use crate::quad::scan_roots;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Characteristics {
    /// single pre-shock root: carried velocity u0(s)
    Unique { s: f64, u: f64 },
    /// characteristics have crossed: number of preimages found (a folded
    /// orientation-reversing branch counts even when it is the only one)
    MultiRoot { count: usize },
    /// no preimage inside the probe bracket
    NoRoot,
}

/// Number of probe panels used for bracketing.
const PROBE_PANELS: usize = 4096;

/// Solve s + t u0(s) = x over a probe bracket sized by the data.
pub fn solve_characteristics(v: &VelocityProfile, t: f64, x: f64) -> Result<Characteristics> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: format!("time must be nonnegative and finite, got {t}"),
        });
    }
    if t == 0.0 {
        return Ok(Characteristics::Unique { s: x, u: v.eval(x) });
    }
    // Linear data solves in closed form.
    if let VelocityProfile::Linear { alpha } = v {
        let a = 1.0 + alpha * t;
        if a == 0.0 {
            // every characteristic passes through the focus at once
            return Ok(Characteristics::MultiRoot { count: usize::MAX });
        }
        let s = x / a;
        return Ok(classify_roots(v, t, &[s]));
    }
    let reach = v.max_abs_on(-50.0, 50.0, PROBE_PANELS);
    let lo = x - 10.0 * (1.0 + x.abs()) - 10.0 * t * reach;
    let hi = x + 10.0 * (1.0 + x.abs()) + 10.0 * t * reach;
    let g = |s: f64| s + t * v.eval(s) - x;
    let mut roots = scan_roots(g, lo, hi, PROBE_PANELS);
    // Newton polish against the analytic derivative.
    for s in &mut roots {
        for _ in 0..5 {
            let gs = *s + t * v.eval(*s) - x;
            let dgs = 1.0 + t * v.deriv(*s);
            if dgs.abs() < 1e-12 {
                break;
            }
            let next = *s - gs / dgs;
            if !next.is_finite() || (next - *s).abs() <= 1e-14 * s.abs().max(1.0) {
                *s = next;
                break;
            }
            *s = next;
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-10 * a.abs().max(1.0));
    if roots.is_empty() {
        return Ok(Characteristics::NoRoot);
    }
    Ok(classify_roots(v, t, &roots))
}

fn classify_roots(v: &VelocityProfile, t: f64, roots: &[f64]) -> Characteristics {
    let folded = roots.iter().any(|&s| 1.0 + t * v.deriv(s) <= 0.0);
    if roots.len() == 1 && !folded {
        let s = roots[0];
        Characteristics::Unique { s, u: v.eval(s) }
    } else {
        Characteristics::MultiRoot { count: roots.len() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::blowup_time;

    #[test]
    fn linear_pre_shock_root() {
        let v = VelocityProfile::linear(-1.0);
        // s (1 - 0.5) = 1 -> s = 2, u = -2
        match solve_characteristics(&v, 0.5, 1.0).unwrap() {
            Characteristics::Unique { s, u } => {
                assert!((s - 2.0).abs() < 1e-12);
                assert!((u + 2.0).abs() < 1e-12);
            }
            other => panic!("expected unique root, got {other:?}"),
        }
    }

    #[test]
    fn linear_past_critical_time_is_crossed() {
        let v = VelocityProfile::linear(-1.0);
        match solve_characteristics(&v, 1.5, 0.0).unwrap() {
            Characteristics::MultiRoot { .. } => {}
            other => panic!("expected crossed characteristics, got {other:?}"),
        }
    }

    #[test]
    fn unique_before_blowup_on_a_grid() {
        let v = VelocityProfile::custom(|x: f64| -x.tanh(), |x: f64| -1.0 / x.cosh().powi(2), true);
        let bt = blowup_time(&v);
        assert!((bt - 1.0).abs() < 1e-6, "blowup time {bt}");
        for t in [0.2, 0.5, 0.9] {
            for x in [-2.0, -0.3, 0.0, 0.7, 3.0] {
                match solve_characteristics(&v, t * bt, x).unwrap() {
                    Characteristics::Unique { s, .. } => {
                        let resid = s + t * bt * v.eval(s) - x;
                        assert!(resid.abs() < 1e-10, "residual {resid} at t={t}, x={x}");
                    }
                    other => panic!("expected unique at t={t}, x={x}, got {other:?}"),
                }
            }
        }
    }

    #[test]
    fn tanh_past_blowup_multivalued_near_origin() {
        let v = VelocityProfile::custom(|x: f64| -x.tanh(), |x: f64| -1.0 / x.cosh().powi(2), true);
        match solve_characteristics(&v, 2.0, 0.0).unwrap() {
            Characteristics::MultiRoot { count } => assert!(count >= 3, "count {count}"),
            other => panic!("expected multivalued, got {other:?}"),
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let v = VelocityProfile::linear(-2.0);
        match solve_characteristics(&v, 0.0, 0.3).unwrap() {
            Characteristics::Unique { s, u } => {
                assert_eq!(s, 0.3);
                assert!((u + 0.6).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }
}
