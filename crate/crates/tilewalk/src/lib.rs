//! Scenario files, CSV artifacts, parallel runners and the `tilewalk` command line.

pub mod commands;
pub mod format;
pub mod runner;
pub mod scenario;

pub use commands::{run_command, CliError, Context, Report, COMMANDS};
pub use scenario::{load_scenario, parse_scenario, Scenario, SchemaError, SchemaErrors};
