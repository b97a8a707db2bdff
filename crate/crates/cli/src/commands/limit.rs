use crate::config::{parse_sigma_seq, require, ConfigMap};
use crate::error::CliResult;
use crate::output::{emit, float, Table};
use crate::LimitArgs;
use gradstorm_core::{
    conditional_mean, continuity_residual, fokker_planck_residual, sigma_convergence,
    DensityProfile, NoiseModel, PhasePoint, VelocityProfile,
};

pub fn run(args: LimitArgs) -> CliResult<()> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let t = require(cfg.fill(args.t, "t")?, "t")?;
    let x = require(cfg.fill(args.x, "x")?, "x")?;
    let seq_spec = cfg
        .fill(args.sigma_seq, "sigma-seq")?
        .unwrap_or_else(|| "pow2:0:-10".to_string());
    let velocity_spec = require(cfg.fill(args.velocity, "velocity")?, "velocity")?;
    let density_spec = require(cfg.fill(args.density, "density")?, "density")?;
    let velocity: VelocityProfile = velocity_spec.parse()?;
    let density: DensityProfile = density_spec.parse()?;
    let sigmas = parse_sigma_seq(&seq_spec)?;

    let conv = sigma_convergence(&density, &velocity, t, x, &sigmas)?;

    let mut table = Table::new(&format!(
        "t={t} x={x} sigma-seq={seq_spec} velocity={velocity_spec} density={density_spec}"
    ));
    table.comment(&format!("fitted_order: {}", float(conv.fitted_order)));
    table.header(&[
        "sigma",
        "gap",
        "continuity_residual",
        "fokker_planck_residual",
    ]);
    for &(sigma, gap) in &conv.steps {
        let noise = NoiseModel::new(sigma)?;
        let continuity = continuity_residual(t, x, &density, &velocity, &noise)?;
        let u_hat = conditional_mean(t, x, &density, &velocity, &noise)?.u_hat;
        let fp =
            fokker_planck_residual(t, PhasePoint { x, u: u_hat }, &density, &velocity, &noise)?;
        table.row(&[float(sigma), float(gap), float(continuity), float(fp)]);
    }
    emit(args.out.as_deref(), &table.finish())
}
