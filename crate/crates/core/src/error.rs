use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure category, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad configuration, malformed input files, out-of-range queries.
    Input,
    /// Non-finite values or divergence during a computation.
    Numerical,
    /// The equilibrium linear system has no admissible solution.
    Infeasible,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("dither frequencies violate the separation condition: {0}")]
    Frequencies(FrequencyViolations),

    #[error("non-finite {quantity} for node {node} at iteration {iteration}")]
    NonFinite {
        quantity: &'static str,
        node: usize,
        iteration: usize,
    },

    #[error("non-finite {0}")]
    NonFiniteValue(String),

    #[error("negative action {value} for node {node}")]
    NegativeAction { node: usize, value: f64 },

    #[error("evaluation time {t} outside domain [{start}, {end}]")]
    OutOfDomain { t: f64, start: f64, end: f64 },

    #[error("tail sum diverges; pass a finite truncation of the step schedule")]
    DivergentTail,

    #[error("envelope fit rejected: {0}")]
    FitRejected(String),

    #[error("equilibrium system is singular")]
    SingularSystem,

    #[error("nonpositive target {value} for node {node} (requires bandwidth * mean direct gain > price * noise power)")]
    NonpositiveTarget { node: usize, value: f64 },

    #[error("equilibrium component {node} is negative ({value})")]
    NegativeSolution { node: usize, value: f64 },

    #[error("equilibrium residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NonFinite { .. }
            | Error::NonFiniteValue(_)
            | Error::DivergentTail
            | Error::FitRejected(_) => ErrorClass::Numerical,
            Error::SingularSystem
            | Error::NonpositiveTarget { .. }
            | Error::NegativeSolution { .. }
            | Error::Residual { .. } => ErrorClass::Infeasible,
            // A negative action is reached only when the learner drives a
            // power below zero mid-run.
            Error::NegativeAction { .. } => ErrorClass::Numerical,
            _ => ErrorClass::Input,
        }
    }
}

/// One violated frequency relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrequencyViolation {
    /// Two nodes share a frequency.
    Equal(usize, usize),
    /// `omega[i] + omega[j]` equals `omega[k]` (possibly `i == j`).
    Sum(usize, usize, usize),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrequencyViolations(pub Vec<FrequencyViolation>);

impl fmt::Display for FrequencyViolations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in self.0.iter().enumerate() {
            if n > 0 {
                f.write_str("; ")?;
            }
            match v {
                FrequencyViolation::Equal(i, j) => write!(f, "Omega[{i}] == Omega[{j}]")?,
                FrequencyViolation::Sum(i, j, k) => {
                    write!(f, "Omega[{i}] + Omega[{j}] == Omega[{k}]")?
                }
            }
        }
        Ok(())
    }
}
