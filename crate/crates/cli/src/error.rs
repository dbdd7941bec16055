//! CLI errors and their exit-code mapping: 2 for parse/usage problems,
//! 3 for numerical failures inside an analysis.

use std::fmt;

use shapestat_core::ShapeError;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed input file.
    Parse { path: String, line: usize, message: String },
    /// An object's landmark count disagrees with the file header.
    ShapeMismatch { path: String, line: usize, expected: usize, got: usize },
    Io { path: String, message: String },
    Usage(String),
    /// An analysis failed numerically (focal mean, singular covariance,
    /// no convergence, ...).
    Numerical(ShapeError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. }
            | CliError::ShapeMismatch { .. }
            | CliError::Io { .. }
            | CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    /// Stable machine-readable tag for JSON error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::ShapeMismatch { .. } => "shape_mismatch",
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
            CliError::Numerical(_) => "numerical",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse { path, line, message } => {
                write!(f, "{path}:{line}: {message}")
            }
            CliError::ShapeMismatch { path, line, expected, got } => {
                write!(f, "{path}:{line}: object has {got} landmarks, header says {expected}")
            }
            CliError::Io { path, message } => write!(f, "{path}: {message}"),
            CliError::Usage(message) => write!(f, "{message}"),
            CliError::Numerical(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ShapeError> for CliError {
    fn from(e: ShapeError) -> Self {
        match e {
            // Incomparable inputs are a data problem, not a numerical one.
            ShapeError::MismatchedLandmarkCounts { a, b } => CliError::Usage(format!(
                "samples have different landmark counts ({a} vs {b})"
            )),
            other => CliError::Numerical(other),
        }
    }
}
