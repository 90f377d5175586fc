//! Configuration, command dispatch and file output for the `coldplasma` binary.
//!
//! Exit codes: 0 ok, 1 I/O or internal error, 2 configuration error,
//! 3 slope breakdown, 4 non-finite breakdown, 5 elliptic solve failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{
    breaking_probe_command, dispersion_rows, run_command, sweep_command, write_dispersion_table,
};
pub use config::{parse_config, parse_dispersion_config, parse_sweep_config, RunConfig};
pub use error::{exit, CliError};
