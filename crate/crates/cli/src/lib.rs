//! Batch runner for fidelity-estimation sweeps over noise intensity `p`,
//! correlation degree `d` and protocol.

pub mod config;
pub mod experiment;

pub use config::{ConfigError, ExperimentConfig, Issue, NoiseKind};
pub use experiment::{grid_points, run, run_to_file, write_csv, GridPoint, Row, CSV_HEADER};
