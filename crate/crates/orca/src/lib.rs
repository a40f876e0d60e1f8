//! Reproducible command-line runs over the memory and photon-counting models.
//!
//! Each subcommand resolves its configuration (file, then flag overrides),
//! validates it, computes, and writes plot-ready CSV or JSON tagged with the
//! tool version and a hash of the resolved configuration.

pub mod absorption;
pub mod cli;
pub mod counts;
pub mod error;
pub mod lifetime;
pub mod output;
pub mod sweep;

pub use error::{OrcaError, Result};

/// Resolved configuration as hashed and echoed into every output.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Resolved<'a, C: serde::Serialize> {
    pub command: &'a str,
    pub seed: u64,
    pub config: &'a C,
}
