//! File formats and scenario runner behind the `gradmap` command.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod output;
pub mod scenario;
pub mod schema;

pub use error::{CliError, CliResult};
pub use output::{CsvTable, F17};
pub use scenario::{load_scenario, run_scenario, Command, Params, Report, RunOutput, Scenario, SCHEMA_VERSION};
pub use schema::{load_measure, parse_measure, write_measure};
