//! Error type shared by every module in the crate.

use chrono::NaiveDate;
use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across series handling, diagnostics,
/// estimation, and evaluation.
///
/// Variants are split between data/usage problems (bad files, wrong grids,
/// not enough observations) and numerical problems discovered mid-computation
/// (collinearity, overflow, degenerate denominators). The CLI maps the former
/// to exit code 1 and the latter to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    /// Too few observations for the requested operation.
    #[error("{context}: need at least {needed} observations, got {got}")]
    InsufficientData {
        context: String,
        needed: usize,
        got: usize,
    },

    /// A required value is missing at a specific date.
    #[error("series '{series}' has no value at {date}")]
    MissingObservation { series: String, date: NaiveDate },

    /// A denominator evaluated to exactly zero.
    #[error("division by zero in {context}")]
    DivisionByZero { context: String },

    /// The available history does not reach far enough back.
    #[error("{context}: history short by {shortfall} {unit}")]
    InsufficientHistory {
        context: String,
        shortfall: usize,
        unit: &'static str,
    },

    /// A series that must vary is constant.
    #[error("series '{name}' has zero variance")]
    DegenerateVariance { name: String },

    /// A design column is an exact linear combination of the others.
    #[error("column '{column}' is exactly collinear with the remaining columns")]
    ExactCollinearity { column: String },

    /// A caller-supplied argument is outside its admissible range.
    #[error("invalid parameter: {message}")]
    InvalidParameter { message: String },

    /// Lag-weight parameters would overflow the exponential.
    #[error("lag-weight parameters overflow: {message}")]
    ParameterOverflow { message: String },

    /// The regression design matrix has linearly dependent columns.
    #[error("design matrix is rank deficient ({message})")]
    RankDeficient { message: String },

    /// Every optimisation start failed; one cause per start.
    #[error("fit failed for every start:\n{}", .causes.join("\n"))]
    FitFailed { causes: Vec<String> },

    /// A file violates its expected format.
    #[error("{file}:{line}: {message}")]
    FormatError {
        file: String,
        line: usize,
        message: String,
    },

    /// Quantile values out of order relative to their probability levels.
    #[error("line {line}: {message}")]
    InvalidQuantiles { line: usize, message: String },

    /// Paired inputs have different lengths.
    #[error("{context}: length mismatch, {left} vs {right}")]
    ShapeMismatch {
        context: String,
        left: usize,
        right: usize,
    },

    /// A comparison ratio has a zero reference value.
    #[error("reference {metric} is zero, ratio undefined")]
    DegenerateReference { metric: String },

    /// An observation does not sit on the declared calendar grid.
    #[error("series '{series}': {date} is not on the {expected} grid")]
    FrequencyMismatch {
        series: String,
        date: NaiveDate,
        expected: &'static str,
    },

    /// A series with no observations where at least one is required.
    #[error("series '{name}' has no observations")]
    EmptySeries { name: String },

    /// A series violates a structural rule (ordering, finiteness, ...).
    #[error("series '{series}': {message}")]
    InvalidSeries { series: String, message: String },

    /// Underlying I/O failure, annotated with the path involved.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Whether this error reflects bad input rather than a numerical failure
    /// discovered during computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InsufficientData { .. }
                | Error::MissingObservation { .. }
                | Error::InvalidParameter { .. }
                | Error::FormatError { .. }
                | Error::InvalidQuantiles { .. }
                | Error::ShapeMismatch { .. }
                | Error::FrequencyMismatch { .. }
                | Error::EmptySeries { .. }
                | Error::InvalidSeries { .. }
                | Error::Io { .. }
        )
    }

    /// Helper for I/O errors carrying the offending path.
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
