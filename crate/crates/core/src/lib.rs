//! Numerical toolkit for the fractional Laplacian `(-Δ)^s` on R^n.

pub mod ball;
pub mod cli;
pub mod error;
pub mod extension;
pub mod field;
pub mod density;
pub mod interp;
pub mod levy;
pub mod pointwise;
pub mod quad;
pub mod spectral;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
