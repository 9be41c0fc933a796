//! Wiener amalgam norms, free Schrödinger propagation, and numerical checks of
//! dispersive and Strichartz-type estimates against exact Gaussian solutions.

pub mod amalgam;
pub mod bounds;
pub mod error;
pub mod exponent;
pub mod oracle;
pub mod potential;
pub mod quad;
pub mod report;
pub mod sharpness;
pub mod spectral;

pub use error::{Error, Result};
pub use exponent::Exponent;
pub use oracle::GaussianState;
pub use spectral::{Grid, SampledField};
