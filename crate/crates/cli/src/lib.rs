//! Problem-file ingestion, solver dispatch, trace emission, and the
//! verification driver behind the `proxkit` binary.

pub mod build;
pub mod commands;
pub mod error;
pub mod schema;

pub use error::CliError;
