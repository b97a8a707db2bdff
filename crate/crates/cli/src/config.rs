//! Optional config files mirror the command flags as `key = value` lines;
//! values given on the command line win over the file.

use crate::error::{CliError, CliResult};
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

pub struct ConfigMap(BTreeMap<String, String>);

impl ConfigMap {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return Err(CliError::Config(format!(
                        "{}:{}: expected 'key = value', got '{raw}'",
                        path.display(),
                        lineno + 1
                    )));
                };
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(ConfigMap(map))
    }

    /// Flag value if given, else the config-file value under `key`.
    pub fn fill<T: FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>>
    where
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::Config(format!("config key '{key}' = '{raw}': {e}"))),
        }
    }
}

pub fn require<T>(value: Option<T>, key: &str) -> CliResult<T> {
    value.ok_or_else(|| {
        CliError::Config(format!(
            "missing required parameter '{key}' (flag --{key} or config entry)"
        ))
    })
}

/// Inclusive grid `a:b:n`.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Config(format!("grid '{spec}' must be <start>:<stop>:<count>"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let step = (b - a) / (n - 1) as f64;
    Ok((0..n).map(|i| a + step * i as f64).collect())
}

/// Distances from the critical time as `m1:m2`, meaning eps = -10^-d for
/// d from m1 to m2 in quarter-decade steps.
pub fn parse_eps_decades(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || {
        CliError::Config(format!(
            "eps-decades '{spec}' must be <first>:<last> with first <= last"
        ))
    };
    let (m1, m2) = spec.split_once(':').ok_or_else(bad)?;
    let m1: f64 = m1.parse().map_err(|_| bad())?;
    let m2: f64 = m2.parse().map_err(|_| bad())?;
    if !(m1 <= m2) || !m1.is_finite() || !m2.is_finite() {
        return Err(bad());
    }
    let steps = ((m2 - m1) * 4.0).round() as usize;
    Ok((0..=steps)
        .map(|j| -10f64.powf(-(m1 + 0.25 * j as f64)))
        .collect())
}

/// Noise sequence: either `pow2:<hi>:<lo>` for 2^hi down to 2^lo, or a
/// comma-separated list of values.
pub fn parse_sigma_seq(spec: &str) -> CliResult<Vec<f64>> {
    if let Some(rest) = spec.strip_prefix("pow2:") {
        let bad = || CliError::Config(format!("sigma-seq '{spec}' must be pow2:<hi>:<lo>"));
        let (hi, lo) = rest.split_once(':').ok_or_else(bad)?;
        let hi: i32 = hi.parse().map_err(|_| bad())?;
        let lo: i32 = lo.parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).rev().map(|j| 2f64.powi(j)).collect());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("sigma-seq entry '{s}' is not a number")))
        })
        .collect()
}
