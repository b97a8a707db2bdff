//! Adaptive Gauss-Kronrod quadrature over segmented domains.
//!
//! The integrands in this crate are products of a density profile with a
//! Gaussian weight whose location and width swing over many orders of
//! magnitude, so the integrator takes an explicit segment plan (peak ladders,
//! profile breakpoints) and refines from there. Infinite tails are handled by
//! geometric extension with a decay check; a tail that stops decaying is
//! reported as divergent instead of silently truncated.

use crate::error::{Error, Result};

/// 21-point Kronrod nodes (positive half, includes 0).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_21,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

/// Weights of the embedded 10-point Gauss rule (nodes XGK[1], XGK[3], ...).
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// cap on adaptive subdivisions across the whole domain
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_intervals: 4096,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadEstimate {
    pub value: f64,
    pub abs_error: f64,
    pub fn_evals: usize,
}

/// One Gauss-Kronrod pass over [a, b]: (kronrod, error estimate).
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut resk = WGK[10] * fc;
    let mut resg = 0.0;
    let mut resabs = WGK[10] * fc.abs();
    let mut fv = [0.0f64; 21];
    fv[20] = fc;
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv[j] = f1;
        fv[10 + j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[10 + j] - mean).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    // QUADPACK-style error rescale
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let eps = f64::EPSILON * 50.0;
    if resabs > f64::MIN_POSITIVE / eps {
        err = err.max(eps * resabs);
    }
    (value, err, resabs)
}

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// integral of |f|: sets the machine-noise floor for cancelling sums
    resabs: f64,
}

/// Adaptive integration over the union of [bounds[i], bounds[i+1]].
/// `bounds` must be finite and sorted ascending.
pub fn integrate_segments<F: Fn(f64) -> f64>(
    f: F,
    bounds: &[f64],
    opts: &QuadOptions,
) -> Result<QuadEstimate> {
    if bounds.len() < 2 {
        return Ok(QuadEstimate {
            value: 0.0,
            abs_error: 0.0,
            fn_evals: 0,
        });
    }
    let mut evals = 0usize;
    let mut heap: Vec<Interval> = Vec::with_capacity(bounds.len() + 64);
    for w in bounds.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e, m) = gk21(&f, w[0], w[1]);
        evals += 21;
        if !v.is_finite() {
            return Err(Error::NotFinite {
                context: "quadrature segment".into(),
            });
        }
        heap.push(Interval {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
            resabs: m,
        });
    }
    loop {
        let total: f64 = heap.iter().map(|i| i.value).sum();
        let err: f64 = heap.iter().map(|i| i.error).sum();
        // an integral whose halves cancel cannot be resolved below the
        // rounding noise of the absolute mass, however finely we split;
        // twice the per-interval floor keeps stragglers from spinning
        let noise_floor: f64 = heap.iter().map(|i| i.resabs).sum::<f64>() * 100.0 * f64::EPSILON;
        let tol = opts
            .abs_tol
            .max(opts.rel_tol * total.abs())
            .max(noise_floor);
        if err <= tol {
            return Ok(QuadEstimate {
                value: total,
                abs_error: err,
                fn_evals: evals,
            });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::NonConvergent {
                achieved: err,
                requested: tol,
                context: "adaptive quadrature budget exhausted",
            });
        }
        // bisect the worst interval
        let (idx, _) = heap
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty heap");
        let Interval { a, b, .. } = heap.swap_remove(idx);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            // interval at floating-point resolution; accept as is
            let (v, e, ra) = gk21(&f, a, b);
            evals += 21;
            heap.push(Interval {
                a,
                b,
                value: v,
                error: 0.0_f64.max(e * 1e-3),
                resabs: ra,
            });
            continue;
        }
        for (lo, hi) in [(a, m), (m, b)] {
            let (v, e, ra) = gk21(&f, lo, hi);
            evals += 21;
            if !v.is_finite() {
                return Err(Error::NotFinite {
                    context: "quadrature segment".into(),
                });
            }
            heap.push(Interval {
                a: lo,
                b: hi,
                value: v,
                error: e,
                resabs: ra,
            });
        }
    }
}

/// Domain description: core breakpoints plus optional open tails.
#[derive(Debug, Clone)]
pub struct DomainPlan {
    /// sorted interior breakpoints; must contain at least 2 points
    pub breakpoints: Vec<f64>,
    /// extend past the last breakpoint toward +inf
    pub extend_right: bool,
    /// extend below the first breakpoint toward -inf
    pub extend_left: bool,
}

impl DomainPlan {
    pub fn finite(breakpoints: Vec<f64>) -> Self {
        DomainPlan {
            breakpoints,
            extend_right: false,
            extend_left: false,
        }
    }

    pub fn open(breakpoints: Vec<f64>) -> Self {
        DomainPlan {
            breakpoints,
            extend_right: true,
            extend_left: true,
        }
    }
}

const MAX_TAIL_DOUBLINGS: usize = 96;

/// Integrate over a plan, geometrically extending open ends until two
/// consecutive outer segments fall below the tolerance share. A tail whose
/// segment contributions stop decaying is reported as divergent.
pub fn integrate_plan<F: Fn(f64) -> f64>(
    f: F,
    plan: &DomainPlan,
    opts: &QuadOptions,
) -> Result<QuadEstimate> {
    let core = integrate_segments(&f, &plan.breakpoints, opts)?;
    let mut value = core.value;
    let mut error = core.abs_error;
    let mut evals = core.fn_evals;

    let seg_opts = QuadOptions {
        max_intervals: 256,
        ..*opts
    };
    for (rightward, active) in [(true, plan.extend_right), (false, plan.extend_left)] {
        if !active {
            continue;
        }
        let edge = if rightward {
            *plan.breakpoints.last().expect("nonempty plan")
        } else {
            plan.breakpoints[0]
        };
        let mut lo = edge;
        let mut step = edge.abs().max(1.0);
        let mut quiet = 0usize;
        let mut prev_contrib = f64::INFINITY;
        let mut growing = 0usize;
        for _ in 0..MAX_TAIL_DOUBLINGS {
            let hi = if rightward { lo + step } else { lo - step };
            let seg = if rightward {
                integrate_segments(&f, &[lo, hi], &seg_opts)?
            } else {
                integrate_segments(&f, &[hi, lo], &seg_opts)?
            };
            value += seg.value;
            error += seg.abs_error;
            evals += seg.fn_evals;
            let thresh = 0.1 * opts.abs_tol.max(opts.rel_tol * value.abs());
            let contrib = seg.value.abs();
            if contrib <= thresh {
                quiet += 1;
                if quiet >= 2 {
                    break;
                }
            } else {
                quiet = 0;
                if contrib >= prev_contrib {
                    growing += 1;
                    if growing >= 3 {
                        return Err(Error::DivergentIntegral {
                            context: "tail contributions do not decay",
                        });
                    }
                } else {
                    growing = 0;
                }
            }
            prev_contrib = contrib;
            lo = hi;
            step *= 2.0;
        }
        if quiet < 2 {
            return Err(Error::DivergentIntegral {
                context: "tail still significant after extension budget",
            });
        }
    }
    Ok(QuadEstimate {
        value,
        abs_error: error,
        fn_evals: evals,
    })
}

/// Scan [lo, hi] with `n` panels and return all bracketed sign-change roots of
/// `g`, refined by bisection to ~1e-14 relative.
pub fn scan_roots<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    if !(hi > lo) || n < 2 {
        return roots;
    }
    let h = (hi - lo) / n as f64;
    let mut xa = lo;
    let mut ga = g(xa);
    for i in 1..=n {
        let xb = lo + h * i as f64;
        let gb = g(xb);
        if ga == 0.0 {
            roots.push(xa);
        } else if ga.is_finite() && gb.is_finite() && ga * gb < 0.0 {
            let (mut a, mut b, mut fa) = (xa, xb, ga);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = g(m);
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
                if (b - a).abs() <= 1e-14 * a.abs().max(b.abs()).max(1.0) {
                    break;
                }
            }
            roots.push(0.5 * (a + b));
        }
        xa = xb;
        ga = gb;
    }
    if xa == hi && ga == 0.0 {
        roots.push(hi);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    roots
}

/// Sorted, deduplicated breakpoint list clipped to [lo, hi] with the
/// endpoints always present.
pub fn assemble_breakpoints(points: impl IntoIterator<Item = f64>, lo: f64, hi: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = points
        .into_iter()
        .filter(|p| p.is_finite() && *p > lo && *p < hi)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= f64::EPSILON * 4.0 * a.abs().max(1.0));
    pts
}
