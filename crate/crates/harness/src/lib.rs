//! Experiment configs, run manifests, the command implementations behind the
//! `coulomb-lab` CLI and the acceptance contracts.

pub mod acceptance;
pub mod commands;
mod error;
pub mod manifest;
pub mod spec;

pub use error::{exit, HarnessError, Result};
