//! Configuration-driven experiments for the `budgex-core` learners.
//!
//! A TOML file names an instance family, a learner and how many
//! replications to run. [`commands`] turns it into CSV files: per-replication
//! results, summaries, log-log rate fits, invariant audits and instance
//! complexity tables. Replications run in parallel, each on its own random
//! substream, and are written in replication order, so the same
//! configuration and seed always produce the same bytes.

pub mod audit;
pub mod commands;
pub mod config;
mod error;
pub mod experiment;
pub mod instances;
pub mod output;

pub use commands::{analyze, audit, run, sweep, Options};
pub use config::Config;
pub use error::CliError;
