//! Command-line front end for the trapecho simulator: configuration in
//! laboratory units, conversion to natural trap units, and CSV/JSON output.

pub mod commands;
pub mod config;
pub mod error;
pub mod natural;
pub mod output;

pub use commands::{execute, Command};
pub use config::RunConfig;
pub use error::CliError;
pub use natural::NaturalRun;
