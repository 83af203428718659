//! Scenario runner for `latent-idm`: loads TOML scenarios, runs prediction,
//! diagnosis and concentration experiments, and writes JSON or CSV reports.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod report;
pub mod scenario;
pub mod selftest;

pub use catalog::{catalog, resolve, write_atomic, SCENARIO_DIR_ENV};
pub use error::{CliError, CliResult};
pub use report::{run_scenario, Format, Report};
pub use scenario::{parse_scenario, Kind, Scenario};
pub use selftest::selftest;
