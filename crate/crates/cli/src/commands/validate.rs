//! Deterministic self-check battery: every closed form in the crate is
//! compared against an independent evaluation path, and the stochastic
//! machinery is checked against quadrature with fixed seeds. The JSON
//! report depends only on (version, seed); timings go to stderr.

use crate::error::{CliError, CliResult};
use crate::output::{emit, float};
use crate::ValidateArgs;
use gradstorm_core::quad::{integrate_segments, QuadOptions};
use gradstorm_core::{
    bin_averaged_mean, classify_regime, closedform, coefficients, conditional_mean,
    continuity_residual, focusing_slope, fokker_planck_residual, mc_conditional_mean, sde,
    sigma_convergence, solve_characteristics, spatial_derivative, Characteristics, DensityProfile,
    McConfig, NoiseModel, PhasePoint, Regime, VelocityProfile,
};
use serde::Serialize;
use std::time::Instant;

#[derive(Serialize)]
struct CheckRecord {
    name: &'static str,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct ValidationReport {
    version: &'static str,
    seed: u64,
    passed: usize,
    failed: usize,
    checks: Vec<CheckRecord>,
}

struct Ctx {
    seed: u64,
}

/// Accumulates pass/fail lines; detail keeps the worst observed number so
/// two runs with the same seed serialize identically.
struct Outcome {
    passed: bool,
    detail: String,
}

type Check = (&'static str, fn(&Ctx) -> Outcome);

fn ok(detail: String) -> Outcome {
    Outcome {
        passed: true,
        detail,
    }
}

fn fail(detail: String) -> Outcome {
    Outcome {
        passed: false,
        detail,
    }
}

fn gate(condition: bool, detail: String) -> Outcome {
    Outcome {
        passed: condition,
        detail,
    }
}

pub fn run(args: ValidateArgs) -> CliResult<()> {
    let cfg = crate::config::ConfigMap::load(args.config.as_deref())?;
    let seed = cfg.fill(args.seed, "seed")?.unwrap_or(1);
    let ctx = Ctx { seed };

    let battery: &[Check] = &[
        (
            "characteristics_match_linear_form",
            characteristics_match_linear_form,
        ),
        (
            "flat_weight_mean_is_classical",
            flat_weight_mean_is_classical,
        ),
        (
            "flat_weight_mean_ignores_noise",
            flat_weight_mean_ignores_noise,
        ),
        (
            "gaussian_mean_matches_closed_form",
            gaussian_mean_matches_closed_form,
        ),
        (
            "critical_slope_is_three_halves",
            critical_slope_is_three_halves,
        ),
        ("initial_data_recovery", initial_data_recovery),
        ("mc_flat_weight_cross_check", mc_flat_weight_cross_check),
        ("mc_gaussian_cross_check", mc_gaussian_cross_check),
        ("euler_step_matches_exact_map", euler_step_matches_exact_map),
        ("power_law_sampler_moments", power_law_sampler_moments),
        (
            "histogram_reruns_bit_identical",
            histogram_reruns_bit_identical,
        ),
        ("regime_classification_table", regime_classification_table),
        ("suppressed_limit_ratio", suppressed_limit_ratio),
        ("suppressed_edge_value", suppressed_edge_value),
        ("focusing_slope_closed_form", focusing_slope_closed_form),
        ("noise_convergence_order_two", noise_convergence_order_two),
        ("transport_residuals_small", transport_residuals_small),
        (
            "crossed_characteristics_detected",
            crossed_characteristics_detected,
        ),
    ];

    let mut checks = Vec::with_capacity(battery.len());
    for (name, check) in battery {
        let start = Instant::now();
        let outcome = check(&ctx);
        eprintln!(
            "{} {} ({:.2}s)",
            if outcome.passed { "ok  " } else { "FAIL" },
            name,
            start.elapsed().as_secs_f64()
        );
        checks.push(CheckRecord {
            name,
            passed: outcome.passed,
            detail: outcome.detail,
        });
    }

    let passed = checks.iter().filter(|c| c.passed).count();
    let failed = checks.len() - passed;
    let report = ValidationReport {
        version: env!("CARGO_PKG_VERSION"),
        seed,
        passed,
        failed,
        checks,
    };
    let mut body = serde_json::to_string_pretty(&report).expect("report serializes");
    body.push('\n');
    emit(args.out.as_deref(), &body)?;
    if failed > 0 {
        return Err(CliError::Validation { failed });
    }
    Ok(())
}

fn noise(sigma: f64) -> NoiseModel {
    NoiseModel::new(sigma).expect("fixed sigma is valid")
}

fn characteristics_match_linear_form(_: &Ctx) -> Outcome {
    let mut worst = 0.0f64;
    for alpha in [-0.5, -1.0, -2.0] {
        let v = VelocityProfile::linear(alpha);
        let t_star = -1.0 / alpha;
        for frac in [0.2, 0.5, 0.8] {
            let t = frac * t_star;
            for x in [-1.0, 0.5, 2.0] {
                let want = match closedform::burgers_linear(alpha, t, x) {
                    Ok(w) => w,
                    Err(e) => return fail(format!("closed form at alpha={alpha}: {e}")),
                };
                match solve_characteristics(&v, t, x) {
                    Ok(Characteristics::Unique { u, .. }) => {
                        worst = worst.max((u - want).abs() / want.abs().max(1.0));
                    }
                    other => return fail(format!("alpha={alpha} t={t} x={x}: {other:?}")),
                }
            }
        }
    }
    gate(worst < 1e-10, format!("max rel deviation {}", float(worst)))
}

fn flat_weight_mean_is_classical(_: &Ctx) -> Outcome {
    let alpha = -1.0;
    let v = VelocityProfile::linear(alpha);
    let f = DensityProfile::Uniform;
    let n = noise(1.0);
    let mut worst = 0.0f64;
    for t in [0.2, 0.5, 0.9] {
        for x in [-2.0, 0.5, 1.0] {
            let want = alpha * x / (1.0 + alpha * t);
            match conditional_mean(t, x, &f, &v, &n) {
                Ok(m) => worst = worst.max((m.u_hat - want).abs() / want.abs().max(1.0)),
                Err(e) => return fail(format!("t={t} x={x}: {e}")),
            }
        }
    }
    gate(worst < 1e-8, format!("max rel deviation {}", float(worst)))
}

fn flat_weight_mean_ignores_noise(_: &Ctx) -> Outcome {
    let v = VelocityProfile::linear(-1.0);
    let f = DensityProfile::Uniform;
    let mut worst = 0.0f64;
    for t in [0.3, 0.7] {
        for x in [-1.0, 2.0] {
            let mut values = Vec::new();
            for sigma in [0.5, 1.0, 2.0] {
                match conditional_mean(t, x, &f, &v, &noise(sigma)) {
                    Ok(m) => values.push(m.u_hat),
                    Err(e) => return fail(format!("t={t} x={x} sigma={sigma}: {e}")),
                }
            }
            let spread = (values[0] - values[1])
                .abs()
                .max((values[2] - values[1]).abs());
            worst = worst.max(spread / values[1].abs().max(1.0));
        }
    }
    gate(worst < 1e-8, format!("max sigma spread {}", float(worst)))
}

fn gaussian_mean_matches_closed_form(_: &Ctx) -> Outcome {
    let (alpha, r, sigma) = (-1.0, 1.0, 1.0);
    let v = VelocityProfile::linear(alpha);
    let f = DensityProfile::gaussian(r).expect("r > 0");
    let n = noise(sigma);
    let mut worst = 0.0f64;
    for t in [0.25, 0.75, 1.0, 1.5] {
        for x in [-1.5, 0.4, 1.0] {
            let want = match closedform::gaussian_mean(alpha, r, sigma, t, x) {
                Ok(w) => w,
                Err(e) => return fail(format!("closed form t={t}: {e}")),
            };
            match conditional_mean(t, x, &f, &v, &n) {
                Ok(m) => worst = worst.max((m.u_hat - want).abs() / want.abs().max(1.0)),
                Err(e) => return fail(format!("t={t} x={x}: {e}")),
            }
        }
    }
    gate(worst < 1e-8, format!("max rel deviation {}", float(worst)))
}

fn critical_slope_is_three_halves(_: &Ctx) -> Outcome {
    let v = VelocityProfile::linear(-1.0);
    let f = DensityProfile::gaussian(1.0).expect("r > 0");
    let n = noise(1.0);
    match spatial_derivative(1.0, 0.0, &f, &v, &n) {
        Ok(s) => gate(
            (s.analytic - 1.5).abs() < 1e-6,
            format!("slope at critical time {}", float(s.analytic)),
        ),
        Err(e) => fail(format!("{e}")),
    }
}

fn initial_data_recovery(_: &Ctx) -> Outcome {
    let v = VelocityProfile::linear(-1.0);
    let f = DensityProfile::gaussian(1.0).expect("r > 0");
    match conditional_mean(0.0, 3.0, &f, &v, &noise(1.0)) {
        Ok(m) => gate(m.u_hat == -3.0, format!("u_hat(0, 3) = {}", float(m.u_hat))),
        Err(e) => fail(format!("{e}")),
    }
}

fn mc_cross_check(ctx: &Ctx, f: &DensityProfile, trunc: Option<f64>) -> Outcome {
    let v = VelocityProfile::linear(-1.0);
    let n = noise(1.0);
    let t = 0.5;
    let cfg = McConfig {
        n_samples: 100_000,
        seed: ctx.seed,
        bin_width: None,
        truncation: trunc,
    };
    let est = match mc_conditional_mean(t, -1.5, 1.5, f, &v, &n, &cfg) {
        Ok(e) => e,
        Err(e) => return fail(format!("{e}")),
    };
    let mut compared = 0usize;
    let mut inside = 0usize;
    let mut worst_z = 0.0f64;
    for bin in est.bins.iter().filter(|b| b.count > 500) {
        let want = match bin_averaged_mean(t, bin.x_lo, bin.x_hi, f, &v, &n, est.l_used) {
            Ok(w) => w,
            Err(e) => return fail(format!("bin [{}, {}]: {e}", bin.x_lo, bin.x_hi)),
        };
        let z = (bin.mean_u - want).abs() / bin.std_error;
        worst_z = worst_z.max(z);
        compared += 1;
        if z < 3.0 {
            inside += 1;
        }
    }
    if compared < 5 {
        return fail(format!("only {compared} bins had enough samples"));
    }
    let rate = inside as f64 / compared as f64;
    gate(
        rate >= 0.95,
        format!(
            "{inside}/{compared} bins within 3 standard errors, worst z {}",
            float(worst_z)
        ),
    )
}

fn mc_flat_weight_cross_check(ctx: &Ctx) -> Outcome {
    mc_cross_check(ctx, &DensityProfile::Uniform, Some(8.0))
}

fn mc_gaussian_cross_check(ctx: &Ctx) -> Outcome {
    mc_cross_check(ctx, &DensityProfile::gaussian(1.0).expect("r > 0"), None)
}

fn euler_step_matches_exact_map(ctx: &Ctx) -> Outcome {
    let n = noise(1.0);
    let (t, x0, u0) = (0.5, 0.3, -0.7);
    let steps = 512usize;
    let samples = 50_000usize;
    let (mut sx, mut sxx, mut su, mut suu, mut sxu) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..samples {
        let mut rng = sde::rng_for_sample(ctx.seed ^ 0xE1, i as u64);
        let p = sde::euler_maruyama_terminal(t, x0, u0, &n, steps, &mut rng);
        let (dx, du) = (p.x - (x0 + u0 * t), p.u - u0);
        sx += dx;
        sxx += dx * dx;
        su += du;
        suu += du * du;
        sxu += dx * du;
    }
    let m = samples as f64;
    let var_x = t.powi(3) / 3.0;
    let var_u = t;
    let cov = t * t / 2.0;
    // moment z-scores against the exact terminal covariance
    let zs = [
        (sx / m) / (var_x / m).sqrt(),
        (su / m) / (var_u / m).sqrt(),
        (sxx / m - var_x) / (var_x * (2.0 / m).sqrt()),
        (suu / m - var_u) / (var_u * (2.0 / m).sqrt()),
        (sxu / m - cov) / ((var_x * var_u + cov * cov) / m).sqrt(),
    ];
    let worst = zs.iter().fold(0.0f64, |a, z| a.max(z.abs()));
    gate(
        worst < 4.0,
        format!("worst moment z-score {}", float(worst)),
    )
}

fn power_law_sampler_moments(ctx: &Ctx) -> Outcome {
    let (k, l) = (-2.0, 64.0);
    let f = DensityProfile::power_law(k).expect("finite k");
    let sampler = match sde::InitialSampler::for_profile(&f, l) {
        Ok(s) => s,
        Err(e) => return fail(format!("{e}")),
    };
    let samples = 100_000usize;
    let (mut s1, mut s2) = (0.0, 0.0);
    for i in 0..samples {
        let mut rng = sde::rng_for_sample(ctx.seed ^ 0xB4, i as u64);
        match sampler.draw(&mut rng) {
            Ok(x) => {
                s1 += x;
                s2 += x * x;
            }
            Err(e) => return fail(format!("draw {i}: {e}")),
        }
    }
    let weight = |x: f64| (1.0 + x * x).powf(k);
    let opts = QuadOptions::default();
    let grid: Vec<f64> = vec![-l, -8.0, -1.0, 0.0, 1.0, 8.0, l];
    let total = match integrate_segments(weight, &grid, &opts) {
        Ok(q) => q.value,
        Err(e) => return fail(format!("mass quadrature: {e}")),
    };
    let second = match integrate_segments(|x| x * x * weight(x), &grid, &opts) {
        Ok(q) => q.value,
        Err(e) => return fail(format!("second moment quadrature: {e}")),
    };
    let m = samples as f64;
    let var = second / total;
    // fourth moment of (1+x^2)^-2 on [-64, 64] is log-divergent-ish slow;
    // bound the var-of-var conservatively through the fourth-moment integral
    let fourth = match integrate_segments(|x| x.powi(4) * weight(x), &grid, &opts) {
        Ok(q) => q.value / total,
        Err(e) => return fail(format!("fourth moment quadrature: {e}")),
    };
    let z_mean = (s1 / m) / (var / m).sqrt();
    let z_var = (s2 / m - var) / ((fourth - var * var) / m).sqrt();
    let worst = z_mean.abs().max(z_var.abs());
    gate(
        worst < 4.0,
        format!("worst moment z-score {}", float(worst)),
    )
}

fn histogram_reruns_bit_identical(ctx: &Ctx) -> Outcome {
    let f = DensityProfile::gaussian(1.0).expect("r > 0");
    let v = VelocityProfile::linear(-1.0);
    let n = noise(1.0);
    let cfg = McConfig {
        n_samples: 50_000,
        seed: ctx.seed,
        bin_width: None,
        truncation: None,
    };
    let a = mc_conditional_mean(0.5, -1.0, 1.0, &f, &v, &n, &cfg);
    let b = mc_conditional_mean(0.5, -1.0, 1.0, &f, &v, &n, &cfg);
    match (a, b) {
        (Ok(a), Ok(b)) => {
            let same = a.bins.len() == b.bins.len()
                && a.bins.iter().zip(&b.bins).all(|(x, y)| {
                    x.count == y.count
                        && x.mean_u.to_bits() == y.mean_u.to_bits()
                        && x.std_error.to_bits() == y.std_error.to_bits()
                });
            gate(same, format!("{} bins compared bitwise", a.bins.len()))
        }
        (Err(e), _) | (_, Err(e)) => fail(format!("{e}")),
    }
}

type RegimeCase = (f64, fn(&Regime) -> bool, &'static str);

fn regime_classification_table(_: &Ctx) -> Outcome {
    let n = noise(1.0);
    let cases: &[RegimeCase] = &[
        (
            -2.0,
            |r| matches!(r, Regime::Suppressed { .. }),
            "suppressed",
        ),
        (
            -1.0,
            |r| matches!(r, Regime::Suppressed { .. }),
            "suppressed",
        ),
        (
            -0.75,
            |r| matches!(r, Regime::Algebraic { exponent, .. } if (exponent - 0.5).abs() < 1e-12),
            "algebraic with exponent 1/2",
        ),
        (-0.5, |r| matches!(r, Regime::LogCorrected), "log_corrected"),
        (
            0.0,
            |r| matches!(r, Regime::LinearRate { b3 } if (b3 - 1.0).abs() < 1e-12),
            "linear rate b3 = 1",
        ),
        (
            1.0,
            |r| matches!(r, Regime::LinearRate { b3 } if (b3 - 3.0).abs() < 1e-12),
            "linear rate b3 = 3",
        ),
    ];
    for &(k, predicate, label) in cases {
        match classify_regime(k, -1.0, &n) {
            Ok(r) if predicate(&r) => {}
            Ok(r) => return fail(format!("k={k}: expected {label}, got {r:?}")),
            Err(e) => return fail(format!("k={k}: {e}")),
        }
    }
    ok(format!("{} tail classes verified", cases.len()))
}

fn suppressed_limit_ratio(_: &Ctx) -> Outcome {
    match coefficients(-1.3, -1.0, &noise(1.0)) {
        Ok(c) => {
            let ratio = c.a2 / c.a4;
            gate(
                (ratio - 1.5).abs() < 1e-9,
                format!("a2/a4 = {}", float(ratio)),
            )
        }
        Err(e) => fail(format!("{e}")),
    }
}

fn suppressed_edge_value(_: &Ctx) -> Outcome {
    match classify_regime(-1.0, -1.0, &noise(1.0)) {
        Ok(Regime::Suppressed { limit_slope }) => gate(
            (limit_slope - 0.118023402114658).abs() < 1e-12,
            format!("limit slope {}", float(limit_slope)),
        ),
        other => fail(format!("{other:?}")),
    }
}

fn focusing_slope_closed_form(_: &Ctx) -> Outcome {
    let f = DensityProfile::gaussian(1.0).expect("r > 0");
    let v = VelocityProfile::linear(-1.0);
    let beta = -2.0;
    match focusing_slope(beta, &f, &v, &noise(1.0)) {
        Ok(got) => {
            // same point through the closed form: slope of the mean at the
            // focusing time -1/beta
            let want = closedform::gaussian_mean(-1.0, 1.0, 1.0, -1.0 / beta, 1.0)
                .expect("closed form in range");
            gate(
                (got - want).abs() < 1e-6 * want.abs(),
                format!(
                    "focusing slope {} vs closed form {}",
                    float(got),
                    float(want)
                ),
            )
        }
        Err(e) => fail(format!("{e}")),
    }
}

fn noise_convergence_order_two(_: &Ctx) -> Outcome {
    let f = DensityProfile::gaussian(1.0).expect("r > 0");
    let v = VelocityProfile::linear(-1.0);
    let (t, x) = (0.5, 1.0);
    let sigmas: Vec<f64> = (0..=6).map(|j| 2f64.powi(-j)).collect();
    let conv = match sigma_convergence(&f, &v, t, x, &sigmas) {
        Ok(c) => c,
        Err(e) => return fail(format!("{e}")),
    };
    let classical = closedform::burgers_linear(-1.0, t, x).expect("pre-shock point");
    let mut worst_gap_err = 0.0f64;
    for &(sigma, gap) in &conv.steps {
        let want = (closedform::gaussian_mean(-1.0, 1.0, sigma, t, x).expect("closed form")
            - classical)
            .abs();
        worst_gap_err = worst_gap_err.max((gap - want).abs());
    }
    let monotone = conv.steps.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-8);
    gate(
        monotone && worst_gap_err < 1e-8 && (conv.fitted_order - 2.0).abs() < 0.2,
        format!(
            "fitted order {}, worst gap deviation {}",
            float(conv.fitted_order),
            float(worst_gap_err)
        ),
    )
}

fn transport_residuals_small(_: &Ctx) -> Outcome {
    let f = DensityProfile::gaussian(1.0).expect("r > 0");
    let v = VelocityProfile::linear(-1.0);
    let n = noise(1.0);
    let (t, x) = (0.5, 0.3);
    let continuity = match continuity_residual(t, x, &f, &v, &n) {
        Ok(r) => r,
        Err(e) => return fail(format!("continuity: {e}")),
    };
    let u_hat = match conditional_mean(t, x, &f, &v, &n) {
        Ok(m) => m.u_hat,
        Err(e) => return fail(format!("mean: {e}")),
    };
    let fp = match fokker_planck_residual(t, PhasePoint { x, u: u_hat }, &f, &v, &n) {
        Ok(r) => r,
        Err(e) => return fail(format!("transport: {e}")),
    };
    gate(
        continuity < 1e-3 && fp < 1e-3,
        format!(
            "continuity residual {}, transport residual {}",
            float(continuity),
            float(fp)
        ),
    )
}

fn crossed_characteristics_detected(_: &Ctx) -> Outcome {
    let v = VelocityProfile::linear(-1.0);
    let pre = solve_characteristics(&v, 0.5, 0.3);
    let post = solve_characteristics(&v, 1.5, 0.3);
    match (pre, post) {
        (Ok(Characteristics::Unique { .. }), Ok(Characteristics::MultiRoot { .. })) => {
            ok("unique before the crossing, multivalued after".into())
        }
        other => fail(format!("{other:?}")),
    }
}
