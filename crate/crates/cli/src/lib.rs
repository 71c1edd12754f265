//! Config loading, report writing and subcommands behind the `strandloss`
//! binary.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{Outcome, Run};
pub use config::{load, SimulationConfig};
