//! File formats and commands behind the `pii-order` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;
pub mod spec;

pub use config::{ConfigError, ExperimentConfig, Method};
pub use run::{RunError, RunOptions};
