use crate::config::{require, ConfigMap};
use crate::error::CliResult;
use crate::output::emit;
use crate::RegimeArgs;
use gradstorm_core::{
    classify_regime, coefficients, predicted_rate_description, CoefficientSet, NoiseModel, Regime,
};
use serde::Serialize;

#[derive(Serialize)]
struct RegimeReport {
    #[serde(flatten)]
    regime: Regime,
    description: String,
    /// rate coefficients; absent when every representative sits on a pole
    coefficients: Option<CoefficientSet>,
}

pub fn run(args: RegimeArgs) -> CliResult<()> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let k = require(cfg.fill(args.k, "k")?, "k")?;
    let alpha = require(cfg.fill(args.alpha, "alpha")?, "alpha")?;
    let sigma = require(cfg.fill(args.sigma, "sigma")?, "sigma")?;
    let noise = NoiseModel::new(sigma)?;

    let regime = classify_regime(k, alpha, &noise)?;
    let report = RegimeReport {
        description: predicted_rate_description(&regime),
        coefficients: coefficients(k, alpha, &noise).ok(),
        regime,
    };
    let mut body = serde_json::to_string_pretty(&report).expect("report serializes");
    body.push('\n');
    emit(args.out.as_deref(), &body)
}
