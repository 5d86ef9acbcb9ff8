//! Scenario configuration, run orchestration and the command line.

pub mod cli;
pub mod config;
pub mod scenarios;
pub mod verify;

pub use cli::run;
pub use config::{load_config, parse_config, Check, ScenarioConfig};
pub use verify::{evaluate, execute, verify, Execution};
