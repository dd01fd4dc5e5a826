//! Config-driven front end behind the `dsc` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, RunConfig};
pub use run::{run, Command, RunOutcome};
