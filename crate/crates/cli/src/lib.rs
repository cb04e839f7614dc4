//! Experiment harness behind the `fj` binary.

pub mod bench;
pub mod error;
pub mod io;
pub mod plan;

pub use error::{CliError, CliResult};
pub use plan::{run_plan, ExperimentPlan};
