//! Library side of the `quasihelm` command: config parsing and experiment drivers.

pub mod config;
pub mod run;

pub use config::{parse_overrides, ConfigError, RawConfig, RunConfig};
pub use run::{run, Experiment, RunError};
