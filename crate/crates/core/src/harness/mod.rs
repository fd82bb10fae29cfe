//! Scenario files, command dispatch and result emission for the CLI.

pub mod cli;
pub mod commands;
pub mod output;
pub mod scenario;

pub use cli::{run_cli, Cli, CliOutput};
pub use commands::{run_command, Command, Flags, Format, Outcome, ResultRecord};
pub use scenario::{parse_scenario, scenario_hash, FunctionalSpec, MatrixSpec, Scenario, Tolerances, VectorSpec};
