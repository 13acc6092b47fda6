pub mod bayes;
pub mod calibration;
pub mod device;
pub mod error;
pub mod error_models;
pub mod fock;
pub mod harness;
pub mod stabilizer;

pub use error::{Error, Result};
