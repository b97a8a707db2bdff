use crate::config::{parse_eps_decades, require, ConfigMap};
use crate::error::CliResult;
use crate::output::{emit, float, Table};
use crate::BlowupArgs;
use gradstorm_core::{blowup_scan, NoiseModel};

pub fn run(args: BlowupArgs) -> CliResult<()> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let k = require(cfg.fill(args.k, "k")?, "k")?;
    let alpha = require(cfg.fill(args.alpha, "alpha")?, "alpha")?;
    let sigma = require(cfg.fill(args.sigma, "sigma")?, "sigma")?;
    let decades = cfg
        .fill(args.eps_decades, "eps-decades")?
        .unwrap_or_else(|| "1:7".to_string());
    let noise = NoiseModel::new(sigma)?;
    let eps = parse_eps_decades(&decades)?;

    let scan = blowup_scan(k, alpha, &noise, &eps)?;

    if let Some(csv_path) = &args.csv {
        let mut table = Table::new(&format!(
            "k={k} alpha={alpha} sigma={sigma} eps-decades={decades}"
        ));
        table.header(&["eps", "slope_at_origin"]);
        for (&e, &s) in scan.epsilon_grid.iter().zip(&scan.slope_at_origin) {
            table.row(&[float(e), float(s)]);
        }
        emit(Some(csv_path), &table.finish())?;
    }

    let mut body = serde_json::to_string_pretty(&scan).expect("scan serializes");
    body.push('\n');
    emit(args.out.as_deref(), &body)
}
