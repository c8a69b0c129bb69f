//! Command-line front end: configuration parsing, run orchestration,
//! verification suites, sweeps, and data emission.

pub mod commands;
pub mod config;
pub mod output;

pub use config::{ConfigError, Mode, Nonlinearity, RunConfig};
