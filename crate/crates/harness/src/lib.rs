//! Monte Carlo engine, reports, file formats and the verification suite for
//! the `ontic-core` models. The `ontic` binary is a thin CLI over this crate.

pub mod acceptance;
pub mod config;
pub mod engine;
pub mod error;
pub mod formats;
pub mod report;

pub use config::{ModelKind, RunConfig};
pub use error::HarnessError;
