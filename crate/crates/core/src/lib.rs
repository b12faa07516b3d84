pub mod analysis;
pub mod calibration;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod mitigation;
pub mod operators;
pub mod schedule;
pub mod tomography;

pub use error::{Error, Result};
