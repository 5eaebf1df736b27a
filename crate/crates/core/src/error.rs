//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("cutoff must be >= 1, got {0}")]
    InvalidCutoff(usize),

    #[error("grid too coarse: need at least {required} points per axis for cutoff {cutoff}, got {got}")]
    GridTooCoarse {
        required: usize,
        got: usize,
        cutoff: usize,
    },

    #[error("unsupported Lp exponent {0}; supported: 2, 4, 6, 12")]
    UnsupportedExponent(u32),

    #[error("fields live on different truncations: {0}")]
    DomainMismatch(String),

    #[error("viscosity must be positive, got {0}")]
    InvalidViscosity(f64),

    #[error("time step must be positive, got {0}")]
    InvalidTimeStep(f64),

    #[error("time step {dt} unstable for scheme {scheme}: requires dt <= {bound} (dt * nu * kappa_max <= {limit})")]
    UnstableTimeStep {
        dt: f64,
        bound: f64,
        limit: f64,
        scheme: &'static str,
    },

    #[error("profile is identically zero")]
    ZeroProfile,

    #[error("no modes retained: {0}")]
    EmptyTruncation(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("field deserialization failed: {0}")]
    Deserialize(String),

    #[error("stored field violates the divergence-free invariant on mode {mode:?} (relative residual {residual:e})")]
    NotDivergenceFree { mode: Vec<i64>, residual: f64 },
}

pub type Result<T> = std::result::Result<T, CoreError>;
