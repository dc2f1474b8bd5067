//! File formats, simulation export, benchmarking and the command-line front
//! end for [`hydap_core`].
//!
//! Everything that touches the file system lives here; the core crate stays
//! `no_std`.

pub mod bench;
pub mod cli;
pub mod config;
mod error;
pub mod formats;
pub mod plot;
pub mod schema;
pub mod sim;
pub mod table;

pub use error::{Error, Result};
pub use hydap_core as core;
