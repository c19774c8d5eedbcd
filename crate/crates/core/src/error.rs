use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpucError {
    #[error("operation `{op}` is not supported for {what}")]
    Unsupported { op: &'static str, what: String },

    #[error("evaluation point {point} is a singular point of {what}")]
    Pole { point: Complex64, what: &'static str },

    #[error("point {z} lies within {distance:.3e} of the unit circle; use boundary mode")]
    NearBoundary { z: Complex64, distance: f64 },

    #[error("quadrature did not converge with {nodes} nodes (last residual {residual:.3e})")]
    Accuracy { residual: f64, nodes: usize },

    #[error("measure degenerates at n = {n}: |alpha_n| = {modulus}")]
    Degenerate { n: usize, modulus: f64 },

    #[error("singular matrix (|det| = {det:.3e})")]
    SingularMatrix { det: f64 },

    #[error("index {index} out of range (available: {available})")]
    OutOfRange { index: i64, available: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("moment data: {0}")]
    Moments(String),

    #[error("io: {0}")]
    Io(String),
}

impl OpucError {
    /// True for errors that signal a numerical breakdown rather than a bad request.
    pub fn is_numerical(&self) -> bool {
        matches!(self, OpucError::Accuracy { .. } | OpucError::Degenerate { .. } | OpucError::SingularMatrix { .. })
    }
}

impl From<std::io::Error> for OpucError {
    fn from(e: std::io::Error) -> Self {
        OpucError::Io(e.to_string())
    }
}

impl From<csv::Error> for OpucError {
    fn from(e: csv::Error) -> Self {
        OpucError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, OpucError>;
