//! Monte Carlo side of the model: simulate particles
//!
//! ```text
//! dX = U dt,    dU = sigma dW,
//! ```
//!
//! from random initial positions and estimate E[U_t | X_t in bin] by
//! histogram. The terminal law given the start point is Gaussian with
//! known covariance, so sampling is exact (no time stepping); an
//! Euler-Maruyama integrator is kept alongside as an independent check
//! of that shortcut.
//!
//! Reproducibility: every sample index owns its own counter-derived RNG,
//! and bins are accumulated in fixed chunk order, so results are
//! bit-identical for a given seed regardless of thread count.

use crate::error::{Error, Result};
use crate::kernel::PhasePoint;
use crate::profiles::{DensityProfile, NoiseModel, VelocityProfile};
use crate::quad::{integrate_segments, QuadOptions};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Monte Carlo run parameters.
#[derive(Debug, Clone, Serialize)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// histogram bin width; default max(sigma t^{3/2} / 2, range / 200)
    pub bin_width: Option<f64>,
    /// initial positions drawn from [-L, L]; default 50 max(1, |x| (1 + a t))
    pub truncation: Option<f64>,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_samples: 100_000,
            seed: 1,
            bin_width: None,
            truncation: None,
        }
    }
}

const MIN_SAMPLES: usize = 10_000;
const MIN_BIN_COUNT: u64 = 30;
const CHUNK: u64 = 65_536;

/// One reported histogram bin.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McBin {
    pub x_lo: f64,
    pub x_hi: f64,
    pub count: u64,
    pub mean_u: f64,
    pub std_error: f64,
}

/// A bin with too few samples to report a mean.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SkippedBin {
    pub x_lo: f64,
    pub x_hi: f64,
    pub count: u64,
}

/// Histogram estimate of the conditional mean over an x range.
#[derive(Debug, Clone, Serialize)]
pub struct McEstimate {
    pub t: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub bin_width: f64,
    pub n_samples: usize,
    pub l_used: Option<f64>,
    pub out_of_range: u64,
    pub bins: Vec<McBin>,
    pub skipped: Vec<SkippedBin>,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream cipher RNG keyed by (seed, sample index): sample i always sees
/// the same stream no matter how work is split across threads.
pub fn rng_for_sample(seed: u64, index: u64) -> ChaCha8Rng {
    let mut state = seed ^ index.wrapping_mul(0xA076_1D64_78BD_642F);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Exact draw of (X_t, U_t) from (x0, u0): the conditional law is Gaussian
/// with Var X = sigma^2 t^3 / 3, Cov = sigma^2 t^2 / 2, Var U = sigma^2 t,
/// realized here through a Cholesky factor of that covariance.
pub fn sample_terminal(
    t: f64,
    x0: f64,
    u0: f64,
    noise: &NoiseModel,
    rng: &mut ChaCha8Rng,
) -> PhasePoint {
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let s = noise.sigma();
    let gx = s * t.powf(1.5) / 3f64.sqrt() * z1;
    let gu = s * t.sqrt() * (0.75f64.sqrt() * z1 + 0.5 * z2);
    PhasePoint {
        x: x0 + u0 * t + gx,
        u: u0 + gu,
    }
}

/// Euler-Maruyama integration of the same system with `steps` uniform
/// steps; converges to the exact map as steps grow.
pub fn euler_maruyama_terminal(
    t: f64,
    x0: f64,
    u0: f64,
    noise: &NoiseModel,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> PhasePoint {
    let h = t / steps as f64;
    let root_h = h.sqrt();
    let s = noise.sigma();
    let (mut x, mut u) = (x0, u0);
    for _ in 0..steps {
        let z: f64 = rng.sample(StandardNormal);
        x += u * h;
        u += s * root_h * z;
    }
    PhasePoint { x, u }
}

/// Inverse-CDF table for the weight (1 + s^2)^k on [-L, L]: cumulative
/// integrals over a geometric panel ladder, inverted per panel through a
/// cubic Hermite model of the CDF.
#[derive(Debug, Clone)]
pub struct PowerLawTable {
    nodes: Vec<f64>,
    cdf: Vec<f64>,
    pdf: Vec<f64>,
    total: f64,
}

impl PowerLawTable {
    pub fn build(k: f64, l: f64) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidParameter {
                name: "l",
                reason: format!("inverse-CDF table needs finite L > 0, got {l}"),
            });
        }
        // geometric ladder toward 0 keeps panels small relative to the
        // local variation scale max(1, |s|) of the weight
        let mut nodes = vec![0.0f64];
        let floor = 1e-9 * l.min(1.0);
        let per_octave = 32;
        let step = 2f64.powf(-1.0 / per_octave as f64);
        let mut x = l;
        while x > floor {
            nodes.push(x);
            x *= step;
        }
        nodes.push(floor);
        let mut right: Vec<f64> = nodes;
        right.sort_by(f64::total_cmp);
        right.dedup();
        let mut full: Vec<f64> = right.iter().rev().map(|v| -v).collect();
        full.extend(right.iter().skip(1));

        let f = |s: f64| (1.0 + s * s).powf(k);
        let opts = QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            max_intervals: 64,
        };
        let mut cdf = Vec::with_capacity(full.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in full.windows(2) {
            let est = integrate_segments(f, &[w[0], w[1]], &opts)?;
            acc += est.value;
            cdf.push(acc);
        }
        let pdf: Vec<f64> = full.iter().map(|&s| f(s)).collect();
        if !(acc > 0.0) || !acc.is_finite() {
            return Err(Error::NotFinite {
                context: format!("power-law mass on [-{l}, {l}] = {acc}"),
            });
        }
        Ok(PowerLawTable {
            nodes: full,
            cdf,
            pdf,
            total: acc,
        })
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let p: f64 = rng.gen::<f64>() * self.total;
        // locate the panel holding p
        let j = match self.cdf.binary_search_by(|c| c.total_cmp(&p)) {
            Ok(i) => i.min(self.cdf.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.cdf.len() - 2),
        };
        let (a, b) = (self.nodes[j], self.nodes[j + 1]);
        let h = b - a;
        let (ca, cb) = (self.cdf[j], self.cdf[j + 1]);
        let (fa, fb) = (self.pdf[j], self.pdf[j + 1]);
        // cubic Hermite model of the CDF on the panel, solved by Newton
        let dc = cb - ca;
        if dc <= 0.0 || h <= 0.0 {
            return 0.5 * (a + b);
        }
        let mut th = ((p - ca) / dc).clamp(0.0, 1.0);
        for _ in 0..4 {
            let h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
            let h10 = th * (1.0 - th) * (1.0 - th);
            let h01 = th * th * (3.0 - 2.0 * th);
            let h11 = th * th * (th - 1.0);
            let val = ca * h00 + h * fa * h10 + cb * h01 + h * fb * h11;
            let d00 = 6.0 * th * (th - 1.0);
            let d10 = (1.0 - th) * (1.0 - 3.0 * th);
            let d01 = -d00;
            let d11 = th * (3.0 * th - 2.0);
            let der = ca * d00 + h * fa * d10 + cb * d01 + h * fb * d11;
            if der > 0.0 {
                th = (th - (val - p) / der).clamp(0.0, 1.0);
            }
        }
        a + th * h
    }
}

/// Draws initial positions according to a density profile.
#[derive(Clone)]
pub enum InitialSampler {
    Uniform {
        l: f64,
    },
    Gaussian {
        r: f64,
    },
    PowerLaw(Arc<PowerLawTable>),
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        l: f64,
        envelope: f64,
    },
}

impl InitialSampler {
    /// Build the sampler for a profile with positions confined to [-L, L].
    /// Gaussian profiles ignore the truncation (their mass is already
    /// concentrated); power-law profiles always go through the
    /// inverse-CDF table; custom densities are rejection-sampled under an
    /// envelope probed from the density itself.
    pub fn for_profile(f: &DensityProfile, l: f64) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidParameter {
                name: "l",
                reason: format!("sampler truncation must be finite and positive, got {l}"),
            });
        }
        match f {
            DensityProfile::Uniform => Ok(InitialSampler::Uniform { l }),
            DensityProfile::Gaussian { r } => Ok(InitialSampler::Gaussian { r: *r }),
            DensityProfile::PowerLaw { k } => Ok(InitialSampler::PowerLaw(Arc::new(
                PowerLawTable::build(*k, l)?,
            ))),
            DensityProfile::Custom { f, .. } => {
                let mut peak = 0.0f64;
                let n = 4096;
                for i in 0..=n {
                    let x = -l + 2.0 * l * i as f64 / n as f64;
                    peak = peak.max(f(x));
                }
                if !(peak > 0.0) || !peak.is_finite() {
                    return Err(Error::NotFinite {
                        context: format!("custom density probe peak {peak}"),
                    });
                }
                Ok(InitialSampler::Custom {
                    f: f.clone(),
                    l,
                    envelope: 1.5 * peak,
                })
            }
        }
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Result<f64> {
        match self {
            InitialSampler::Uniform { l } => Ok((2.0 * rng.gen::<f64>() - 1.0) * l),
            InitialSampler::Gaussian { r } => {
                let z: f64 = rng.sample(StandardNormal);
                Ok(z / (r * 2f64.sqrt()))
            }
            InitialSampler::PowerLaw(table) => Ok(table.draw(rng)),
            InitialSampler::Custom { f, l, envelope } => {
                for _ in 0..100_000 {
                    let x = (2.0 * rng.gen::<f64>() - 1.0) * l;
                    let fx = f(x);
                    if fx > *envelope {
                        return Err(Error::EnvelopeViolation {
                            x,
                            fx,
                            envelope: *envelope,
                        });
                    }
                    if rng.gen::<f64>() * envelope < fx {
                        return Ok(x);
                    }
                }
                Err(Error::InvalidParameter {
                    name: "envelope",
                    reason: "rejection sampler exceeded its proposal budget".into(),
                })
            }
        }
    }
}

/// One-off draw from a profile; builds the sampler internally, so batch
/// work should construct an `InitialSampler` once instead.
pub fn draw_initial(f: &DensityProfile, l: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
    InitialSampler::for_profile(f, l)?.draw(rng)
}

/// Default truncation for initial positions: generous multiple of how far
/// the observation window maps backward along the flow.
pub fn default_truncation(t: f64, x_min: f64, x_max: f64, v: &VelocityProfile) -> f64 {
    let xm = x_min.abs().max(x_max.abs());
    let probe = xm.max(1.0);
    let rate = v.max_abs_on(-probe, probe, 64) / probe;
    50.0 * (xm * (1.0 + rate * t)).max(1.0)
}

struct ChunkAcc {
    count: Vec<u64>,
    sum: Vec<f64>,
    sumsq: Vec<f64>,
    out_of_range: u64,
}

/// Histogram estimate of E[U_t | X_t in bin] over [x_min, x_max].
pub fn mc_conditional_mean(
    t: f64,
    x_min: f64,
    x_max: f64,
    f: &DensityProfile,
    v: &VelocityProfile,
    noise: &NoiseModel,
    cfg: &McConfig,
) -> Result<McEstimate> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::SingularTime { t });
    }
    if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
        return Err(Error::InvalidParameter {
            name: "x_range",
            reason: format!("need x_min < x_max finite, got [{x_min}, {x_max}]"),
        });
    }
    if cfg.n_samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter {
            name: "n_samples",
            reason: format!("need at least {MIN_SAMPLES} samples, got {}", cfg.n_samples),
        });
    }
    let range = x_max - x_min;
    let default_bw = (0.5 * noise.sigma() * t.powf(1.5)).max(range / 200.0);
    let bw = cfg.bin_width.unwrap_or(default_bw);
    if !(bw > 0.0) || !bw.is_finite() {
        return Err(Error::InvalidParameter {
            name: "bin_width",
            reason: format!("bin width must be finite and positive, got {bw}"),
        });
    }
    let nbins = ((range / bw).ceil() as usize).max(1);
    let l = cfg
        .truncation
        .unwrap_or_else(|| default_truncation(t, x_min, x_max, v));
    let sampler = InitialSampler::for_profile(f, l)?;
    let l_used = match sampler {
        InitialSampler::Gaussian { .. } => None,
        _ => Some(l),
    };

    let n = cfg.n_samples as u64;
    let n_chunks = n.div_ceil(CHUNK);
    let chunks: Vec<Result<ChunkAcc>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut acc = ChunkAcc {
                count: vec![0; nbins],
                sum: vec![0.0; nbins],
                sumsq: vec![0.0; nbins],
                out_of_range: 0,
            };
            for i in lo..hi {
                let mut rng = rng_for_sample(cfg.seed, i);
                let x0 = sampler.draw(&mut rng)?;
                let u0 = v.eval(x0);
                let p = sample_terminal(t, x0, u0, noise, &mut rng);
                let off = (p.x - x_min) / bw;
                if off >= 0.0 && off < nbins as f64 {
                    let j = off as usize;
                    acc.count[j] += 1;
                    acc.sum[j] += p.u;
                    acc.sumsq[j] += p.u * p.u;
                } else {
                    acc.out_of_range += 1;
                }
            }
            Ok(acc)
        })
        .collect();

    // merge in chunk order so the result is independent of thread count
    let mut count = vec![0u64; nbins];
    let mut sum = vec![0.0f64; nbins];
    let mut sumsq = vec![0.0f64; nbins];
    let mut out_of_range = 0u64;
    for chunk in chunks {
        let c = chunk?;
        for j in 0..nbins {
            count[j] += c.count[j];
            sum[j] += c.sum[j];
            sumsq[j] += c.sumsq[j];
        }
        out_of_range += c.out_of_range;
    }

    let mut bins = Vec::new();
    let mut skipped = Vec::new();
    for j in 0..nbins {
        let x_lo = x_min + j as f64 * bw;
        let x_hi = x_min + (j + 1) as f64 * bw;
        if count[j] > MIN_BIN_COUNT {
            let m = count[j] as f64;
            let mean = sum[j] / m;
            let var = ((sumsq[j] - m * mean * mean) / (m - 1.0)).max(0.0);
            bins.push(McBin {
                x_lo,
                x_hi,
                count: count[j],
                mean_u: mean,
                std_error: (var / m).sqrt(),
            });
        } else {
            skipped.push(SkippedBin {
                x_lo,
                x_hi,
                count: count[j],
            });
        }
    }

    Ok(McEstimate {
        t,
        x_min,
        x_max,
        bin_width: bw,
        n_samples: cfg.n_samples,
        l_used,
        out_of_range,
        bins,
        skipped,
    })
}
