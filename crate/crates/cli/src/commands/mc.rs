use crate::config::{require, ConfigMap};
use crate::error::{CliError, CliResult};
use crate::output::{emit, float, Table};
use crate::McArgs;
use gradstorm_core::{
    bin_averaged_mean, mc_conditional_mean, DensityProfile, McConfig, NoiseModel, VelocityProfile,
};

pub fn run(args: McArgs) -> CliResult<()> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let t = require(cfg.fill(args.t, "t")?, "t")?;
    let x_min = require(cfg.fill(args.x_min, "x-min")?, "x-min")?;
    let x_max = require(cfg.fill(args.x_max, "x-max")?, "x-max")?;
    let samples = require(cfg.fill(args.samples, "samples")?, "samples")?;
    let seed = cfg.fill(args.seed, "seed")?.unwrap_or(1);
    let bins = require(cfg.fill(args.bins, "bins")?, "bins")?;
    let sigma = require(cfg.fill(args.sigma, "sigma")?, "sigma")?;
    let velocity_spec = require(cfg.fill(args.velocity, "velocity")?, "velocity")?;
    let density_spec = require(cfg.fill(args.density, "density")?, "density")?;
    let truncation = cfg.fill(args.truncation, "truncation")?;
    let velocity: VelocityProfile = velocity_spec.parse()?;
    let density: DensityProfile = density_spec.parse()?;
    let noise = NoiseModel::new(sigma)?;
    if bins == 0 {
        return Err(CliError::Config("bins must be positive".into()));
    }
    if !(x_max > x_min) {
        return Err(CliError::Config(format!(
            "x-max ({x_max}) must exceed x-min ({x_min})"
        )));
    }

    let mc_cfg = McConfig {
        n_samples: samples,
        seed,
        bin_width: Some((x_max - x_min) / bins as f64),
        truncation,
    };
    let est = mc_conditional_mean(t, x_min, x_max, &density, &velocity, &noise, &mc_cfg)?;

    let mut table = Table::new(&format!(
        "t={t} x-min={x_min} x-max={x_max} samples={samples} seed={seed} bins={bins} \
         sigma={sigma} velocity={velocity_spec} density={density_spec} truncation={}",
        truncation
            .map(|l| l.to_string())
            .unwrap_or_else(|| "auto".into())
    ));
    match est.l_used {
        Some(l) => table.comment(&format!("l_used: {l}")),
        None => table.comment("l_used: none (normalizable weight)"),
    }
    table.comment(&format!("out_of_range: {}", est.out_of_range));
    table.comment(&format!("skipped_bins: {}", est.skipped.len()));
    table.header(&["x_center", "u_hat_mc", "std_error", "count", "u_hat_quad"]);
    for bin in &est.bins {
        let quad = bin_averaged_mean(
            t, bin.x_lo, bin.x_hi, &density, &velocity, &noise, est.l_used,
        )
        .map_err(|e| {
            CliError::Computation(format!(
                "quadrature comparison at bin [{}, {}]: {e}",
                bin.x_lo, bin.x_hi
            ))
        })?;
        table.row(&[
            float(0.5 * (bin.x_lo + bin.x_hi)),
            float(bin.mean_u),
            float(bin.std_error),
            bin.count.to_string(),
            float(quad),
        ]);
    }
    emit(args.out.as_deref(), &table.finish())
}
