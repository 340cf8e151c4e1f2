//! Simulation harness and file formats for shaped OOK polar codes.

pub mod config;
pub mod construct;
mod error;
pub mod harness;
pub mod rateloss;
pub mod rates;
pub mod spec_io;

pub use error::{Error, Result};
