//! Command-line front end for `kappa-core`: scenario configs, report
//! emission and the invariant verification suite.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod rng;
pub mod verify;

pub use app::{execute, Cli, Outcome};
pub use config::{RunConfig, Scenario};
pub use error::CliError;
