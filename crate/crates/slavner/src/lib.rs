//! IO and orchestration around `slavner-core`: configuration files,
//! checkpoint directories, system presets, submission packaging and the
//! command implementations behind the `slavner` binary.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod fsio;
pub mod preset;
pub mod submission;
pub mod tensor;

pub use error::{Error, Result};
