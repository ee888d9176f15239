//! File formats, commands and the example corpus behind the `gestures`
//! binary.

pub mod commands;
pub mod corpus;
pub mod error;
pub mod format;
pub mod matrix;

pub use commands::{Flags, Outcome};
pub use error::CliError;
