//! Initial data profiles: velocity u0, mass density f, and the noise level.
//!
//! The velocity profile fixes the deterministic initial condition u0(x); the
//! density profile weights how much fluid starts at each point. Both enter
//! every downstream integral, so the variants carry their analytic structure
//! (scale, parity, normalizability) rather than just a closure.

use crate::error::{Error, Result};
use crate::special;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Initial velocity u0(x).
#[derive(Clone)]
pub enum VelocityProfile {
    /// u0(x) = alpha * x
    Linear { alpha: f64 },
    /// arbitrary smooth data with its analytic derivative
    Custom { u0: RealFn, du0: RealFn, odd: bool },
}

impl fmt::Debug for VelocityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VelocityProfile::Linear { alpha } => write!(f, "Linear {{ alpha: {alpha} }}"),
            VelocityProfile::Custom { odd, .. } => write!(f, "Custom {{ odd: {odd} }}"),
        }
    }
}

impl VelocityProfile {
    pub fn linear(alpha: f64) -> Self {
        VelocityProfile::Linear { alpha }
    }

    pub fn custom(
        u0: impl Fn(f64) -> f64 + Send + Sync + 'static,
        du0: impl Fn(f64) -> f64 + Send + Sync + 'static,
        odd: bool,
    ) -> Self {
        VelocityProfile::Custom {
            u0: Arc::new(u0),
            du0: Arc::new(du0),
            odd,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            VelocityProfile::Linear { alpha } => alpha * x,
            VelocityProfile::Custom { u0, .. } => u0(x),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            VelocityProfile::Linear { alpha } => *alpha,
            VelocityProfile::Custom { du0, .. } => du0(x),
        }
    }

    pub fn is_odd(&self) -> bool {
        match self {
            VelocityProfile::Linear { .. } => true,
            VelocityProfile::Custom { odd, .. } => *odd,
        }
    }

    /// Largest |u0| over a probe grid; used to size root brackets.
    pub fn max_abs_on(&self, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n.max(1) as f64;
        (0..=n)
            .map(|i| self.eval(lo + h * i as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Max relative deviation of the declared derivative from a central
    /// finite difference over a probe grid.
    pub fn derivative_consistency(&self, lo: f64, hi: f64, n: usize) -> f64 {
        let h_grid = (hi - lo) / n.max(1) as f64;
        let mut worst = 0.0f64;
        for i in 0..=n {
            let x = lo + h_grid * i as f64;
            let h = 1e-5 * x.abs().max(1.0);
            let fd = (self.eval(x + h) - self.eval(x - h)) / (2.0 * h);
            let an = self.deriv(x);
            let denom = an.abs().max(1.0);
            worst = worst.max((fd - an).abs() / denom);
        }
        worst
    }
}

/// First time a characteristic crossing occurs: T = -1 / min_x u0'(x), or
/// +inf when u0' is nowhere negative. The Custom branch probes a grid.
pub fn blowup_time(v: &VelocityProfile) -> f64 {
    blowup_time_on(v, -50.0, 50.0, 4096)
}

pub fn blowup_time_on(v: &VelocityProfile, lo: f64, hi: f64, n: usize) -> f64 {
    let min_slope = match v {
        VelocityProfile::Linear { alpha } => *alpha,
        VelocityProfile::Custom { .. } => {
            let h = (hi - lo) / n.max(1) as f64;
            (0..=n)
                .map(|i| v.deriv(lo + h * i as f64))
                .fold(f64::INFINITY, f64::min)
        }
    };
    if min_slope >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / min_slope
    }
}

/// Initial mass density f(x), stored unnormalized.
#[derive(Clone)]
pub enum DensityProfile {
    /// f = 1 everywhere (not normalizable; conditional means need the
    /// truncation-limit machinery)
    Uniform,
    /// f(x) = (r/sqrt(pi)) exp(-r^2 x^2), already normalized
    Gaussian { r: f64 },
    /// f(x) = (1 + x^2)^k; normalizable iff k < -1/2
    PowerLaw { k: f64 },
    Custom {
        f: RealFn,
        even: bool,
        normalizable: bool,
    },
}

impl fmt::Debug for DensityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityProfile::Uniform => write!(f, "Uniform"),
            DensityProfile::Gaussian { r } => write!(f, "Gaussian {{ r: {r} }}"),
            DensityProfile::PowerLaw { k } => write!(f, "PowerLaw {{ k: {k} }}"),
            DensityProfile::Custom {
                even, normalizable, ..
            } => {
                write!(f, "Custom {{ even: {even}, normalizable: {normalizable} }}")
            }
        }
    }
}

impl DensityProfile {
    pub fn gaussian(r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter {
                name: "r",
                reason: format!("Gaussian width parameter must be positive, got {r}"),
            });
        }
        Ok(DensityProfile::Gaussian { r })
    }

    pub fn power_law(k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: format!("power-law exponent must be finite, got {k}"),
            });
        }
        Ok(DensityProfile::PowerLaw { k })
    }

    pub fn custom(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        even: bool,
        normalizable: bool,
    ) -> Self {
        DensityProfile::Custom {
            f: Arc::new(f),
            even,
            normalizable,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            DensityProfile::Uniform => 1.0,
            DensityProfile::Gaussian { r } => {
                r / std::f64::consts::PI.sqrt() * (-r * r * x * x).exp()
            }
            DensityProfile::PowerLaw { k } => (1.0 + x * x).powf(*k),
            DensityProfile::Custom { f, .. } => f(x),
        }
    }

    pub fn normalizable(&self) -> bool {
        match self {
            DensityProfile::Uniform => false,
            DensityProfile::Gaussian { .. } => true,
            DensityProfile::PowerLaw { k } => *k < -0.5,
            DensityProfile::Custom { normalizable, .. } => *normalizable,
        }
    }

    pub fn is_even(&self) -> bool {
        match self {
            DensityProfile::Custom { even, .. } => *even,
            _ => true,
        }
    }

    /// Total mass \int f dx for normalizable profiles with a closed form.
    /// Custom profiles return None here; callers integrate numerically.
    pub fn mass(&self) -> Option<f64> {
        match self {
            DensityProfile::Gaussian { .. } => Some(1.0),
            DensityProfile::PowerLaw { k } if *k < -0.5 => {
                // \int (1+x^2)^k dx = sqrt(pi) Gamma(-k-1/2) / Gamma(-k)
                Some(std::f64::consts::PI.sqrt() * special::gamma(-k - 0.5) / special::gamma(-k))
            }
            _ => None,
        }
    }

    /// Abscissae where the profile changes scale; seeds quadrature plans.
    pub fn scale_breakpoints(&self) -> Vec<f64> {
        match self {
            DensityProfile::Uniform => vec![],
            DensityProfile::Gaussian { r } => {
                let s = 1.0 / r;
                vec![
                    -8.0 * s,
                    -4.0 * s,
                    -2.0 * s,
                    -s,
                    0.0,
                    s,
                    2.0 * s,
                    4.0 * s,
                    8.0 * s,
                ]
            }
            DensityProfile::PowerLaw { .. } | DensityProfile::Custom { .. } => {
                vec![-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0]
            }
        }
    }
}

/// Langevin forcing level; sigma strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma: f64,
}

impl NoiseModel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("noise level must be positive and finite, got {sigma}"),
            });
        }
        Ok(NoiseModel { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// Profile grammar used by the command line: `<name>[:<param>[,<param>]]`.
impl FromStr for VelocityProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = split_spec(s);
        match name {
            "linear" => {
                let alpha = parse_params(s, &args, 1)?[0];
                Ok(VelocityProfile::Linear { alpha })
            }
            other => Err(Error::InvalidParameter {
                name: "velocity",
                reason: format!("unknown velocity profile '{other}' (expected linear:<alpha>)"),
            }),
        }
    }
}

impl FromStr for DensityProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = split_spec(s);
        match name {
            "uniform" => {
                if !args.is_empty() {
                    return Err(Error::InvalidParameter {
                        name: "density",
                        reason: format!("uniform takes no parameters, got '{s}'"),
                    });
                }
                Ok(DensityProfile::Uniform)
            }
            "gaussian" => DensityProfile::gaussian(parse_params(s, &args, 1)?[0]),
            "powerlaw" => DensityProfile::power_law(parse_params(s, &args, 1)?[0]),
            other => Err(Error::InvalidParameter {
                name: "density",
                reason: format!(
                    "unknown density profile '{other}' (expected uniform, gaussian:<r>, powerlaw:<k>)"
                ),
            }),
        }
    }
}

fn split_spec(s: &str) -> (&str, Vec<&str>) {
    match s.split_once(':') {
        Some((name, rest)) => (name.trim(), rest.split(',').map(str::trim).collect()),
        None => (s.trim(), vec![]),
    }
}

fn parse_params(spec: &str, args: &[&str], want: usize) -> Result<Vec<f64>> {
    if args.len() != want {
        return Err(Error::InvalidParameter {
            name: "profile",
            reason: format!("'{spec}' needs {want} parameter(s), got {}", args.len()),
        });
    }
    args.iter()
        .map(|a| {
            a.parse::<f64>().map_err(|_| Error::InvalidParameter {
                name: "profile",
                reason: format!("cannot parse '{a}' in '{spec}' as a number"),
            })
        })
        .collect()
}
