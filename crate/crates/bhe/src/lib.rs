//! File formats, run configurations and command implementations of the `bhe`
//! command-line workbench. The numerical work lives in `bhe_core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod io;
pub mod models;

pub use commands::{Outcome, Status};
pub use error::CliError;
