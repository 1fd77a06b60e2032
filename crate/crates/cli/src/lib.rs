//! Spec loading, experiment commands and report formatting for the
//! `sclkit` binary.

pub mod commands;
pub mod error;
pub mod format;
pub mod spec;

pub use error::{CliError, Result};
pub use spec::{Problem, ProblemSpec, WeightSpec};
