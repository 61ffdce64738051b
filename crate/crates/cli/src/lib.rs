//! Experiment driver for the boundary-integral verification suites: config
//! parsing, suite execution, and deterministic report assembly.

pub mod config;
pub mod report;
pub mod suites;

pub use config::{Config, ConfigError};
pub use report::{Record, Report};
