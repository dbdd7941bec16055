//! Command-line layer for the shape-statistics library: landmark file
//! ingestion, a shape-distribution simulator with reproducible parallel
//! streams, test drivers with JSON reporting, SVG figures, and a Monte Carlo
//! calibration harness for the asymptotic null distributions.

pub mod calibrate;
pub mod config;
pub mod error;
pub mod landmarks;
pub mod report;
pub mod runner;
pub mod sim;
pub mod svg;

pub use config::{AnalysisConfig, Method};
pub use error::CliError;
pub use landmarks::{parse_landmarks, write_landmarks, Format, LandmarkFile};
pub use sim::{simulate_sample, simulate_sample_stream, SimSpec};

/// Environment variable naming the root directory searched for data files
/// that are not found relative to the working directory.
pub const DATA_DIR_ENV: &str = "SHAPESTAT_DATA_DIR";
