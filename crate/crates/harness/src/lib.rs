//! Command-line harness: configuration, experiment drivers, dataset export
//! and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod oracle;
pub mod svg;

pub use config::{Experiment, Format, RunConfig};
pub use error::{HarnessError, Result};
