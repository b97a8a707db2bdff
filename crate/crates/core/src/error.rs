use thiserror::Error;

/// Errors shared across the numerical modules.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("singular time t = {t}: closed form has a pole there")]
    SingularTime { t: f64 },

    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e} ({context})")]
    NonConvergent {
        achieved: f64,
        requested: f64,
        context: &'static str,
    },

    #[error("integral tail does not decay ({context})")]
    DivergentIntegral { context: &'static str },

    #[error(
        "truncation limit schedule exhausted: last delta {last_delta:.3e} at L = {last_l:.3e}"
    )]
    LimitNotReached { last_l: f64, last_delta: f64 },

    #[error("characteristics equation has {count} crossed or folded roots (post-shock)")]
    MultiRoot { count: usize },

    #[error("characteristics equation has no root in the probe bracket")]
    NoRoot,

    #[error("pole of {factor} at k = {k}")]
    Pole { factor: &'static str, k: f64 },

    #[error("non-finite value encountered in {context}")]
    NotFinite { context: String },

    #[error("density profile is not normalizable; use the renormalized conditional mean")]
    NonNormalizable,

    #[error("rejection envelope violated at x = {x}: f(x) = {fx:.6e} > envelope {envelope:.6e}")]
    EnvelopeViolation { x: f64, fx: f64, envelope: f64 },

    #[error("no data points available for fit ({context})")]
    EmptyFit { context: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;
