use std::fmt;

use thiserror::Error;

/// A single violated network constraint, as reported by
/// [`TensorNetwork::validate`](crate::network::TensorNetwork::validate).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    ModeOutOfRange { mode: usize, num_modes: usize },
    SelfPair { mode: usize },
    DimensionMismatch { u: usize, v: usize, n_u: usize, n_v: usize },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::ModeOutOfRange { mode, num_modes } => {
                write!(f, "mode {mode} is outside 1..={num_modes}")
            }
            Diagnostic::SelfPair { mode } => write!(f, "contraction ({mode}, {mode}) pairs a mode with itself"),
            Diagnostic::DimensionMismatch { u, v, n_u, n_v } => {
                write!(f, "contraction ({u}, {v}) joins modes of sizes {n_u} and {n_v}")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index:?} is out of range for shape {shape:?}")]
    IndexOutOfRange { index: Vec<usize>, shape: Vec<usize> },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid mode {mode} for a tensor of order {order}")]
    InvalidMode { mode: usize, order: usize },

    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("order mismatch: expected {expected}, found {found}")]
    OrderMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid network: {}", join_diagnostics(.0))]
    Validation(Vec<Diagnostic>),

    #[error("network is not normalized: {0}")]
    NotNormalized(String),

    #[error("network has free modes {0:?}; use the partial estimator")]
    PartialNetwork(Vec<usize>),

    #[error("network is cyclic: tensors {cycle:?} form a cycle")]
    Cyclic { cycle: Vec<usize> },

    #[error("network is not connected")]
    Disconnected,

    #[error("enumeration budget of {budget} exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("estimate has imaginary residue {imag:e} (real part {real:e})")]
    ImaginaryResidue { real: f64, imag: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
