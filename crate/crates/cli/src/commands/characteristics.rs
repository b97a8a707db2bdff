use crate::config::{require, ConfigMap};
use crate::error::CliResult;
use crate::output::emit;
use crate::BurgersArgs;
use gradstorm_core::{solve_characteristics, VelocityProfile};

pub fn run(args: BurgersArgs) -> CliResult<()> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let t = require(cfg.fill(args.t, "t")?, "t")?;
    let x = require(cfg.fill(args.x, "x")?, "x")?;
    let velocity: VelocityProfile =
        require(cfg.fill(args.velocity, "velocity")?, "velocity")?.parse()?;

    let outcome = solve_characteristics(&velocity, t, x)?;
    let mut body = serde_json::to_string_pretty(&outcome).expect("outcome serializes");
    body.push('\n');
    emit(args.out.as_deref(), &body)
}
