//! Workbench around the simulation library: run configuration, sample files,
//! tabulated inputs and the `simulate`, `verify`, `tables` and `bench` commands.

pub mod config;
pub mod error;
pub mod run;
pub mod sample_io;
pub mod tabulated;

pub use config::{load_config, parse_config, ConfigError, Overrides, RunConfig};
pub use error::{Result, WorkbenchError};
