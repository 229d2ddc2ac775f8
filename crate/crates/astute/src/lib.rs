//! Files, plots and the command line around `astute-core`.
//!
//! Datasets, curves and attributions are CSV files with JSON sidecars;
//! models are JSON documents that round-trip every parameter bit-exactly.

#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod report;
pub mod svg;

pub use error::{CliError, CliResult};
