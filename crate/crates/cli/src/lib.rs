//! Command-line harness around `roughwalk`: experiment configs, replica-parallel
//! runs with deterministic seeding, and record/manifest output.

pub mod config;
pub mod harness;

pub use config::{ConfigError, ExperimentConfig, Overrides};
pub use harness::{run, Command, HarnessError, Report};
