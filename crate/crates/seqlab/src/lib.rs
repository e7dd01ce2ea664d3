//! File formats and command line for the qutrit simulation core.
//!
//! - [`dsl`]: the pulse-sequence language.
//! - [`config`]: run configuration files.
//! - [`output`]: CSV and JSON artifacts.
//! - [`cli`]: the `seqlab` commands.

pub mod cli;
pub mod config;
pub mod dsl;
pub mod output;
pub mod units;

/// Ramsey sequence followed by the three-bin read-out, with default pulse
/// lengths.
pub const CANONICAL_SEQUENCE: &str = include_str!("../data/canonical.seq");
