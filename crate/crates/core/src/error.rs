use thiserror::Error;

use crate::pconvex::{DualCertificate, MembershipCertificate};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid exponent {0}: must satisfy p >= 1")]
    InvalidExponent(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The target point does not lie in the span of the generators.
    #[error("point is outside the span of the generators (least-squares residual {residual:.3e})")]
    Infeasible { residual: f64 },

    /// Iteration budget exhausted; the partial certificates are still usable
    /// (the dual value is a valid lower bound, the primal is feasible).
    #[error("solver did not converge (primal {primal:.6e}, dual {dual:.6e})", primal = .0.0.alpha_q_norm, dual = .0.1.value)]
    NoConvergence(Box<(MembershipCertificate, DualCertificate)>),

    #[error("point {index} is not covered: minimum representation norm {norm:.6e} exceeds 1")]
    NotCovered { index: usize, norm: f64 },

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error("sum of m_p bounds {sum:.6e} exceeds the cap {cap:.3e}")]
    DivergentSum { sum: f64, cap: f64 },

    #[error("sequence mass exhausted after {completed_blocks} completed blocks")]
    MassExhausted { completed_blocks: usize },

    #[error("degree {0} is too low for this operation")]
    DegreeTooLow(usize),

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("dimension {needed} exceeds the cap {cap}")]
    DimensionCap { needed: usize, cap: usize },

    #[error("generator {0} is zero")]
    ZeroGenerator(usize),

    #[error("radius {eps} is not below the certified radius estimate {radius}")]
    RadiusExceeded { eps: f64, radius: f64 },

    #[error("seminorm series diverges: tail ratio {ratio:.6e} >= 1")]
    DivergentSeminorm { ratio: f64 },

    #[error("conic solver failure: {0}")]
    Solver(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
