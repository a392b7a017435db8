//! Experiment harness for the magnet-localization pipeline.
//!
//! A [`config::RunConfig`] (TOML, boundary units) resolves into a
//! [`scenario::Scenario`] (SI units); [`experiments::run_config`] executes
//! whichever experiment the config names and returns a
//! [`table::ResultTable`], which [`output`] renders into a deterministic run
//! directory (`results.csv`, `aggregates.csv`, `meta.json`).

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod presets;
pub mod runner;
pub mod scenario;
pub mod seeding;
pub mod table;

pub use config::RunConfig;
pub use error::{HarnessError, Result};
pub use experiments::{run_config, ExperimentOutput};
pub use runner::run_scenario;
pub use scenario::{LabeledPose, Scenario};
pub use table::{AggregateRow, ResultTable, TrialRow};
