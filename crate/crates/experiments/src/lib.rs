//! Experiment harness for the `harmonicity` crate: the test-field catalog,
//! flat configuration files, CSV emission and rate fitting.

pub mod catalog;
pub mod config;
pub mod error;
pub mod fit;
pub mod run;

pub use config::{Experiment, ExperimentConfig, RawConfig};
pub use error::ExperimentError;
