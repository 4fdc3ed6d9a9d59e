pub mod detection;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod interference;
pub mod optics;
pub mod protocol;
pub mod sources;
pub mod tomography;

pub use error::{Error, Result};
