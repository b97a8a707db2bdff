//! Small least-squares fits used by the blowup scans.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// max |residual| in the fitted coordinates
    pub max_residual: f64,
}

/// Ordinary least squares y = intercept + slope * x.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::EmptyFit {
            context: "line fit needs at least two points",
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::EmptyFit {
            context: "line fit abscissae are degenerate",
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(LineFit {
        slope,
        intercept,
        max_residual,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct PowerLawFit {
    /// |y| ~ prefactor * (-eps)^(-exponent)
    pub exponent: f64,
    pub prefactor: f64,
    /// max relative deviation of |y| from the model over the fit window
    pub max_rel_residual: f64,
}

/// Fit |y| = prefactor * (-eps)^(-exponent) on a window of (eps, y) pairs
/// with eps < 0, via log-log least squares.
pub fn fit_power_law(eps: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(ys)
        .filter(|(e, y)| **e < 0.0 && y.abs() > 0.0 && y.is_finite())
        .map(|(e, y)| ((-e).ln(), y.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::EmptyFit {
            context: "power-law fit window",
        });
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ls: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let line = fit_line(&xs, &ls)?;
    let exponent = -line.slope;
    let prefactor = line.intercept.exp();
    let max_rel_residual = xs
        .iter()
        .zip(&ls)
        .map(|(x, l)| (l - line.intercept - line.slope * x).exp() - 1.0)
        .map(f64::abs)
        .fold(0.0, f64::max);
    Ok(PowerLawFit {
        exponent,
        prefactor,
        max_rel_residual,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct LogCorrectedFit {
    /// y ~ -c / (eps * ln(-eps))
    pub prefactor: f64,
    pub max_rel_residual: f64,
}

/// Fit the log-corrected blowup model y = -c / (eps ln(-eps)) by linear least
/// squares in c over a window of (eps, y) pairs with -1 < eps < 0.
pub fn fit_log_corrected(eps: &[f64], ys: &[f64]) -> Result<LogCorrectedFit> {
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(ys)
        .filter(|(e, y)| **e < 0.0 && **e > -1.0 && y.is_finite())
        .map(|(e, y)| (-1.0 / (e * (-e).ln()), *y))
        .collect();
    if pts.is_empty() {
        return Err(Error::EmptyFit {
            context: "log-corrected fit window",
        });
    }
    let szz: f64 = pts.iter().map(|(z, _)| z * z).sum();
    let szy: f64 = pts.iter().map(|(z, y)| z * y).sum();
    if szz == 0.0 {
        return Err(Error::EmptyFit {
            context: "log-corrected fit abscissae are degenerate",
        });
    }
    let c = szy / szz;
    let max_rel_residual = pts
        .iter()
        .filter(|(_, y)| y.abs() > 0.0)
        .map(|(z, y)| ((y - c * z) / y).abs())
        .fold(0.0, f64::max);
    Ok(LogCorrectedFit {
        prefactor: c,
        max_rel_residual,
    })
}
