//! Optical scatterometry toolkit: a rigorous coupled-wave forward model for
//! periodic nanostructures, Mueller-matrix signature handling, a kernel SVM
//! trained to localize profile parameters into sub-ranges, and a bounded
//! Levenberg-Marquardt refiner that extracts the final profile.

pub mod error;
pub mod forward;
pub mod lm;
pub mod materials;
pub mod pipeline;
pub mod signature;
pub mod svm;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
