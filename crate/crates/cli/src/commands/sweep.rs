use crate::config::{parse_grid, require, ConfigMap};
use crate::error::{CliError, CliResult};
use crate::output::{emit, float, Table};
use crate::SweepArgs;
use gradstorm_core::{conditional_mean, DensityProfile, NoiseModel, VelocityProfile};
use rayon::prelude::*;

pub fn run(args: SweepArgs) -> CliResult<()> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let t_spec = require(cfg.fill(args.t_grid, "t-grid")?, "t-grid")?;
    let x_spec = require(cfg.fill(args.x_grid, "x-grid")?, "x-grid")?;
    let sigma = require(cfg.fill(args.sigma, "sigma")?, "sigma")?;
    let velocity_spec = require(cfg.fill(args.velocity, "velocity")?, "velocity")?;
    let density_spec = require(cfg.fill(args.density, "density")?, "density")?;
    let velocity: VelocityProfile = velocity_spec.parse()?;
    let density: DensityProfile = density_spec.parse()?;
    let noise = NoiseModel::new(sigma)?;

    let t_grid = parse_grid(&t_spec)?;
    let x_grid = parse_grid(&x_spec)?;
    let points: Vec<(f64, f64)> = t_grid
        .iter()
        .flat_map(|&t| x_grid.iter().map(move |&x| (t, x)))
        .collect();
    let samples: Vec<_> = points
        .par_iter()
        .map(|&(t, x)| {
            conditional_mean(t, x, &density, &velocity, &noise)
                .map_err(|e| CliError::Computation(format!("at t={t} x={x}: {e}")))
        })
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(&format!(
        "t-grid={t_spec} x-grid={x_spec} sigma={sigma} velocity={velocity_spec} density={density_spec}"
    ));
    table.header(&[
        "t",
        "x",
        "u_hat",
        "du_hat_dx",
        "quadrature_error",
        "renormalized",
        "l_used",
    ]);
    for s in &samples {
        table.row(&[
            float(s.t),
            float(s.x),
            float(s.u_hat),
            float(s.du_hat_dx),
            float(s.quadrature_error),
            s.renormalized.to_string(),
            s.l_used.map(float).unwrap_or_default(),
        ]);
    }
    emit(args.out.as_deref(), &table.finish())
}
