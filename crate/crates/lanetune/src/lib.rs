//! File formats, synthetic clips and the command-line front end for
//! `lanetune-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod frames;
pub mod lanes;
pub mod synth;
pub mod trace;

pub use error::{Error, Result};
