//! Configuration, caching and file formats for the `vdwcluster` pipeline.
//!
//! Every stage writes through [`artifacts::Writer`] (temp file then rename)
//! and closes with a `stage.json` record keyed by a digest of its inputs;
//! `run` skips stages whose record and files are intact.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod render;
pub mod stages;

pub use config::RunConfig;
pub use error::CliError;
pub use pipeline::run_pipeline;
