use thiserror::Error;

/// Errors raised by the model, solvers and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A multiplier factor or the normalizing denominator of the map became
    /// nonpositive. `index` is 0-based; `None` means the denominator.
    #[error("domain violation at step {step}: {}", describe_violation(*.index, *.value))]
    DomainViolation {
        step: usize,
        index: Option<usize>,
        value: f64,
    },

    #[error("index {index} is not active: c_i = {c} <= threshold {threshold}")]
    NotActive {
        index: usize,
        c: f64,
        threshold: f64,
    },

    #[error("not a fixed point: residual {0:e}")]
    NotFixedPoint(f64),

    #[error("non-finite matrix entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

fn describe_violation(index: Option<usize>, value: f64) -> String {
    match index {
        Some(i) => format!("multiplier factor of component {} is {value}", i + 1),
        None => format!("normalizing denominator is {value}"),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
