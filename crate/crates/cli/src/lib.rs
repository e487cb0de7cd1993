//! Scenario-driven runner for synchronization experiments: parses scenario
//! files, runs the checks and simulation, and writes CSV and text reports.

pub mod error;
pub mod output;
pub mod pipeline;
pub mod scenario;

pub use error::{exit, CliError, CliResult};
pub use pipeline::{check_graph, run_scenario, sweep, Overrides};
pub use scenario::{load_scenario, parse_scenario, Scenario};
