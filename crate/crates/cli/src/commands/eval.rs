use crate::config::{require, ConfigMap};
use crate::error::CliResult;
use crate::output::emit;
use crate::EvalArgs;
use gradstorm_core::{conditional_mean, DensityProfile, NoiseModel, VelocityProfile};

pub fn run(args: EvalArgs) -> CliResult<()> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let t = require(cfg.fill(args.t, "t")?, "t")?;
    let x = require(cfg.fill(args.x, "x")?, "x")?;
    let sigma = require(cfg.fill(args.sigma, "sigma")?, "sigma")?;
    let velocity: VelocityProfile =
        require(cfg.fill(args.velocity, "velocity")?, "velocity")?.parse()?;
    let density: DensityProfile =
        require(cfg.fill(args.density, "density")?, "density")?.parse()?;
    let noise = NoiseModel::new(sigma)?;

    let sample = conditional_mean(t, x, &density, &velocity, &noise)?;
    let mut body = serde_json::to_string_pretty(&sample).expect("sample serializes");
    body.push('\n');
    emit(args.out.as_deref(), &body)
}
