//! Release-gating acceptance battery. One test per criterion; each prints a
//! single `criterion N PASS` line with the measured numbers (visible under
//! `--nocapture`) and asserts its runtime budget. The test names double as
//! the pass/fail report in the default harness output.

use std::time::Instant;

use gradstorm_core::closedform::{burgers_linear, gaussian_mean};
use gradstorm_core::{
    bin_averaged_mean, blowup_scan, conditional_mean, continuity_residual, focusing_slope,
    fokker_planck_residual, mc_conditional_mean, sigma_convergence, DensityProfile, McConfig,
    NoiseModel, PhasePoint, VelocityProfile,
};

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

/// |got - want| against tol, absolute below magnitude 1 and relative above.
fn mixed_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}

fn budget(start: Instant, limit_s: f64, label: &str) {
    let took = start.elapsed().as_secs_f64();
    assert!(
        took < limit_s,
        "{label}: runtime {took:.2}s exceeds the {limit_s}s budget"
    );
}

/// eps = -10^(-m/4) for m = 4..=28: seven decades approaching the critical
/// time, the grid every scan criterion below is stated on.
fn eps_grid() -> Vec<f64> {
    (4..=28).map(|m| -10f64.powf(-(m as f64) / 4.0)).collect()
}

/// Renormalized quadrature on uniform/linear data reproduces the classical
/// flow alpha x / (1 + alpha t) to 1e-8 relative on a 5x5 grid up to 0.9 of
/// the blowup time, independently of sigma across {0.5, 1, 2}.
#[test]
fn criterion_1_uniform_linear_exactness() {
    let start = Instant::now();
    let alpha = -1.0;
    let f = DensityProfile::Uniform;
    let v = VelocityProfile::linear(alpha);
    let noises: Vec<NoiseModel> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&s| NoiseModel::new(s).unwrap())
        .collect();

    let mut worst_rel = 0.0f64;
    let mut worst_spread = 0.0f64;
    for &t in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        for &x in &[-2.0, -1.0, 0.5, 1.0, 2.0] {
            let want = burgers_linear(alpha, t, x).unwrap();
            let got: Vec<f64> = noises
                .iter()
                .map(|n| conditional_mean(t, x, &f, &v, n).unwrap().u_hat)
                .collect();
            for &u in &got {
                let r = rel_err(u, want);
                worst_rel = worst_rel.max(r);
                assert!(
                    r <= 1e-8,
                    "u_hat({t},{x}) = {u} vs classical {want}: rel {r:.2e}"
                );
            }
            let spread = (got[0] - got[1]).abs().max((got[1] - got[2]).abs());
            let s = spread / want.abs().max(1.0);
            worst_spread = worst_spread.max(s);
            assert!(
                s <= 1e-8,
                "sigma dependence at ({t},{x}): spread {spread:.2e}"
            );
        }
    }
    budget(start, 10.0, "criterion 1");
    println!(
        "criterion 1 PASS: uniform/linear matches alpha x/(1+alpha t), worst rel {worst_rel:.2e}, worst sigma spread {worst_spread:.2e}, {:.2}s",
        start.elapsed().as_secs_f64()
    );
}

/// Quadrature on Gaussian/linear data matches the closed form to 1e-8 on a
/// grid that includes the critical time, where the slope at the origin is
/// exactly -(3/2) alpha.
#[test]
fn criterion_2_gaussian_closed_form() {
    let start = Instant::now();
    let alpha = -1.0;
    let r = 1.0;
    let sigma = 1.0;
    let f = DensityProfile::gaussian(r).unwrap();
    let v = VelocityProfile::linear(alpha);
    let noise = NoiseModel::new(sigma).unwrap();

    let mut worst = 0.0f64;
    for &t in &[0.25, 0.5, 0.75, 1.0, 1.25] {
        for &x in &[-2.0, -1.0, 0.0, 1.0, 2.0] {
            let want = gaussian_mean(alpha, r, sigma, t, x).unwrap();
            let got = conditional_mean(t, x, &f, &v, &noise).unwrap().u_hat;
            let e = mixed_err(got, want);
            worst = worst.max(e);
            assert!(e <= 1e-8, "u_hat({t},{x}) = {got} vs {want}: err {e:.2e}");
        }
    }

    let slope = conditional_mean(1.0, 0.0, &f, &v, &noise)
        .unwrap()
        .du_hat_dx;
    let want_slope = -1.5 * alpha;
    assert!(
        (slope - want_slope).abs() <= 1e-6,
        "critical slope {slope} vs {want_slope}"
    );
    budget(start, 10.0, "criterion 2");
    println!(
        "criterion 2 PASS: Gaussian closed form to {worst:.2e}, slope at critical time {slope:.9} vs {want_slope}, {:.2}s",
        start.elapsed().as_secs_f64()
    );
}

/// A million exact Monte Carlo samples agree with the bin-averaged
/// quadrature mean within three standard errors at 95% of the bins, for
/// both the uniform and the Gaussian profile.
#[test]
fn criterion_3_monte_carlo_cross_validation() {
    let start = Instant::now();
    let v = VelocityProfile::linear(-1.0);
    let noise = NoiseModel::new(1.0).unwrap();
    let t = 0.5;

    let configs: [(&str, DensityProfile, f64, f64); 2] = [
        ("uniform", DensityProfile::Uniform, 1.5, 0.1),
        (
            "gaussian",
            DensityProfile::gaussian(1.0).unwrap(),
            1.2,
            0.08,
        ),
    ];
    let mut report = Vec::new();
    for (name, f, half_range, bin_width) in &configs {
        let cfg = McConfig {
            n_samples: 1_000_000,
            seed: 0x5eed_2026,
            bin_width: Some(*bin_width),
            truncation: None,
        };
        let est = mc_conditional_mean(t, -half_range, *half_range, f, &v, &noise, &cfg).unwrap();
        let mut within = 0usize;
        for b in &est.bins {
            let quad = bin_averaged_mean(t, b.x_lo, b.x_hi, f, &v, &noise, est.l_used).unwrap();
            if (b.mean_u - quad).abs() < 3.0 * b.std_error {
                within += 1;
            }
        }
        let n = est.bins.len();
        assert!(n >= 20, "{name}: only {n} filled bins");
        let frac = within as f64 / n as f64;
        assert!(
            frac >= 0.95,
            "{name}: only {within}/{n} bins within 3 SE ({:.1}%)",
            100.0 * frac
        );
        report.push(format!("{name} {within}/{n} bins within 3 SE"));
    }
    budget(start, 60.0, "criterion 3");
    println!(
        "criterion 3 PASS: {} at 1e6 samples each, {:.1}s",
        report.join(", "),
        start.elapsed().as_secs_f64()
    );
}

/// The slope-at-origin scan over seven decades of eps reproduces the
/// predicted blowup regimes: bounded for k <= -1, square-root growth at
/// k = -0.75, linear growth for k >= 0, and the log-corrected model at the
/// k = -0.5 boundary.
#[test]
fn criterion_4_blowup_threshold() {
    let start = Instant::now();
    let noise = NoiseModel::new(1.0).unwrap();
    let grid = eps_grid();
    let mut notes = Vec::new();

    for k in [-2.0, -1.5] {
        let scan = blowup_scan(k, -1.0, &noise, &grid).unwrap();
        assert!(scan.failures.is_empty(), "k={k}: {:?}", scan.failures);
        let baseline = scan.slope_at_origin[0].abs();
        let peak = scan
            .slope_at_origin
            .iter()
            .fold(0.0f64, |m, s| m.max(s.abs()));
        assert!(
            peak < 10.0 * baseline,
            "k={k}: peak slope {peak} vs baseline {baseline}"
        );
        notes.push(format!(
            "k={k} bounded (peak/baseline {:.3})",
            peak / baseline
        ));
    }

    let scan = blowup_scan(-0.75, -1.0, &noise, &grid).unwrap();
    assert!(scan.failures.is_empty(), "{:?}", scan.failures);
    assert!(
        (scan.fitted_exponent - 0.5).abs() <= 0.1,
        "k=-0.75 exponent {}",
        scan.fitted_exponent
    );
    notes.push(format!("k=-0.75 exponent {:.4}", scan.fitted_exponent));

    for k in [0.0, 1.0] {
        let scan = blowup_scan(k, -1.0, &noise, &grid).unwrap();
        assert!(scan.failures.is_empty(), "k={k}: {:?}", scan.failures);
        assert!(
            (scan.fitted_exponent - 1.0).abs() <= 0.05,
            "k={k} exponent {}",
            scan.fitted_exponent
        );
        notes.push(format!("k={k} exponent {:.4}", scan.fitted_exponent));
    }

    // boundary case: slope(eps) ~ -c / (eps ln(-eps)) over the last decade
    let scan = blowup_scan(-0.5, -1.0, &noise, &grid).unwrap();
    assert!(scan.failures.is_empty(), "{:?}", scan.failures);
    let deepest = scan.epsilon_grid.iter().copied().fold(f64::MIN, f64::max);
    let decade: Vec<(f64, f64)> = scan
        .epsilon_grid
        .iter()
        .zip(&scan.slope_at_origin)
        .filter(|(e, _)| **e >= 10.0 * deepest * (1.0 + 1e-12))
        .map(|(e, s)| (*e, *s))
        .collect();
    assert!(
        decade.len() >= 4,
        "only {} points in the last decade",
        decade.len()
    );
    let model = |e: f64| -1.0 / (e * (-e).ln());
    let (mut num, mut den) = (0.0, 0.0);
    for &(e, s) in &decade {
        num += model(e) * s;
        den += model(e) * model(e);
    }
    let c = num / den;
    let resid = decade
        .iter()
        .map(|&(e, s)| (s - c * model(e)).abs() / s.abs())
        .fold(0.0f64, f64::max);
    assert!(
        resid < 0.10,
        "k=-0.5 log model residual {resid:.3} over the last decade"
    );
    notes.push(format!("k=-0.5 log model c={c:.4} residual {resid:.2e}"));

    budget(start, 600.0, "criterion 4");
    println!(
        "criterion 4 PASS: {}, {:.1}s",
        notes.join("; "),
        start.elapsed().as_secs_f64()
    );
}

/// Prefactor adjudication for the linear-rate regime: the fitted prefactor
/// of eps^{-1} is reported against both candidates 2k+1 and 2(2k+1), naming
/// the one within 15%. Reporting criterion: it gates on the fit being
/// trustworthy, not on which candidate wins.
#[test]
fn criterion_5_linear_rate_prefactor_report() {
    let start = Instant::now();
    let noise = NoiseModel::new(1.0).unwrap();
    let grid = eps_grid();
    let mut lines = Vec::new();
    for k in [0.0, 0.5, 1.0] {
        let scan = blowup_scan(k, -1.0, &noise, &grid).unwrap();
        assert!(scan.failures.is_empty(), "k={k}: {:?}", scan.failures);
        assert!(
            scan.fit_max_rel_residual < 0.05,
            "k={k}: fit residual {} too large to adjudicate",
            scan.fit_max_rel_residual
        );
        let fit = scan.fitted_prefactor;
        let single = 2.0 * k + 1.0;
        let double = 2.0 * single;
        let d1 = rel_err(fit, single);
        let d2 = rel_err(fit, double);
        let verdict = match (d1 <= 0.15, d2 <= 0.15) {
            (true, false) => format!("{single} (2k+1) is within 15%"),
            (false, true) => format!("{double} (2(2k+1)) is within 15%"),
            (true, true) => "both candidates within 15%".to_string(),
            (false, false) => "neither candidate within 15%".to_string(),
        };
        lines.push(format!(
            "k={k}: fitted {fit:.6} vs {single} ({:.1}% off) and {double} ({:.1}% off) -> {verdict}",
            100.0 * d1,
            100.0 * d2
        ));
    }
    budget(start, 600.0, "criterion 5");
    for l in &lines {
        println!("criterion 5 REPORT: {l}");
    }
    println!(
        "criterion 5 PASS: prefactors adjudicated, {:.1}s",
        start.elapsed().as_secs_f64()
    );
}

/// At the suppressed edge k = -1 the terminal slope approaches
/// 3/2 - sqrt(6)/sqrt(pi): checked at eps = -1e-6 within 10%.
#[test]
fn criterion_6_suppressed_edge_value() {
    let start = Instant::now();
    let f = DensityProfile::power_law(-1.0).unwrap();
    let v = VelocityProfile::linear(-1.0);
    let noise = NoiseModel::new(1.0).unwrap();
    let b4 = 1.5 - 6.0f64.sqrt() / std::f64::consts::PI.sqrt();
    let slope = conditional_mean(1.0 - 1e-6, 0.0, &f, &v, &noise)
        .unwrap()
        .du_hat_dx;
    let r = rel_err(slope, b4);
    assert!(r <= 0.10, "slope {slope} vs {b4}: rel {r:.3}");
    budget(start, 60.0, "criterion 6");
    println!(
        "criterion 6 PASS: k=-1 slope at eps=-1e-6 is {slope:.9} vs limit {b4:.9} (rel {r:.2e}), {:.2}s",
        start.elapsed().as_secs_f64()
    );
}

/// The focusing prediction: for Gaussian data the slope of the conditional
/// mean at the origin at time -1/beta equals the closed-form focusing slope,
/// checked at beta in {-2, -0.5} to 1e-4 relative.
#[test]
fn criterion_7_focusing_slope_consistency() {
    let start = Instant::now();
    let f = DensityProfile::gaussian(1.0).unwrap();
    let v = VelocityProfile::linear(-1.0);
    let noise = NoiseModel::new(1.0).unwrap();
    let mut notes = Vec::new();
    for beta in [-2.0, -0.5] {
        let predicted = focusing_slope(beta, &f, &v, &noise).unwrap();
        let t = -1.0 / beta;
        let got = conditional_mean(t, 0.0, &f, &v, &noise).unwrap().du_hat_dx;
        let r = rel_err(got, predicted);
        assert!(
            r <= 1e-4,
            "beta={beta}: slope {got} vs predicted {predicted}, rel {r:.2e}"
        );
        notes.push(format!(
            "beta={beta}: {got:.9} vs {predicted:.9} (rel {r:.1e})"
        ));
    }
    budget(start, 30.0, "criterion 7");
    println!(
        "criterion 7 PASS: {}, {:.2}s",
        notes.join("; "),
        start.elapsed().as_secs_f64()
    );
}

/// Vanishing-noise limit: the gap to the classical solution decreases
/// monotonically over sigma = 2^0..2^{-10} and equals the closed-form
/// difference to 1e-8; the continuity and kinetic transport residuals stay
/// below 1e-3 at stencil-resolvable noise levels.
#[test]
fn criterion_8_vanishing_noise_limit() {
    let start = Instant::now();
    let alpha = -1.0;
    let (t, x) = (0.5, 0.7);
    let f = DensityProfile::gaussian(1.0).unwrap();
    let v = VelocityProfile::linear(alpha);
    let sigmas: Vec<f64> = (0..=10).map(|j| 2.0f64.powi(-j)).collect();

    let conv = sigma_convergence(&f, &v, t, x, &sigmas).unwrap();
    assert_eq!(conv.steps.len(), sigmas.len());
    for w in conv.steps.windows(2) {
        assert!(
            w[1].1 < w[0].1,
            "gap not monotone: {:?} -> {:?}",
            w[0],
            w[1]
        );
    }
    let classical = burgers_linear(alpha, t, x).unwrap();
    let mut worst_gap_err = 0.0f64;
    for &(sigma, gap) in &conv.steps {
        let want = (gaussian_mean(alpha, 1.0, sigma, t, x).unwrap() - classical).abs();
        let e = (gap - want).abs();
        worst_gap_err = worst_gap_err.max(e);
        assert!(e <= 1e-8, "sigma={sigma}: gap {gap} vs closed form {want}");
    }

    let mut worst_resid = 0.0f64;
    for &sigma in &[1.0, 0.5, 0.25, 0.125, 0.0625] {
        let noise = NoiseModel::new(sigma).unwrap();
        let cont = continuity_residual(t, x, &f, &v, &noise).unwrap();
        let u = conditional_mean(t, x, &f, &v, &noise).unwrap().u_hat;
        let fp = fokker_planck_residual(t, PhasePoint { x, u }, &f, &v, &noise).unwrap();
        worst_resid = worst_resid.max(cont).max(fp);
        assert!(cont < 1e-3, "continuity residual {cont} at sigma={sigma}");
        assert!(fp < 1e-3, "kinetic residual {fp} at sigma={sigma}");
    }
    budget(start, 60.0, "criterion 8");
    println!(
        "criterion 8 PASS: gaps monotone over 2^0..2^-10, closed-form match to {worst_gap_err:.2e}, worst transport residual {worst_resid:.2e}, fitted order {:.3}, {:.1}s",
        conv.fitted_order,
        start.elapsed().as_secs_f64()
    );
}

/// Running the validation battery twice with the same seed produces
/// byte-identical report artifacts.
#[test]
fn criterion_9_deterministic_artifacts() {
    let start = Instant::now();
    let exe = env!("CARGO_BIN_EXE_gradstorm");
    let dir = std::env::temp_dir().join(format!("gradstorm-accept-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut artifacts = Vec::new();
    for run in 0..2 {
        let out = dir.join(format!("validate-{run}.json"));
        let status = std::process::Command::new(exe)
            .args(["validate", "--seed", "42", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "validate run {run} failed: {}",
            String::from_utf8_lossy(&status.stderr)
        );
        artifacts.push(std::fs::read(&out).unwrap());
    }
    assert!(!artifacts[0].is_empty());
    assert_eq!(artifacts[0], artifacts[1], "same-seed validate runs differ");
    let bytes = artifacts[0].len();
    std::fs::remove_dir_all(&dir).ok();
    println!(
        "criterion 9 PASS: two seeded validate runs byte-identical ({bytes} bytes), {:.1}s",
        start.elapsed().as_secs_f64()
    );
}
