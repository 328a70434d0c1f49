//! File formats, configuration and the command-line pipeline around `ocdc-core`.

pub mod annotations;
pub mod artifacts;
pub mod config;
pub mod error;
pub mod imageio;
pub mod losscheck;
pub mod pipeline;
pub mod verify;

pub use error::{Error, Result};
