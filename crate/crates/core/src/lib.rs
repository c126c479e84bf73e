//! Fourier-mode Navier-Stokes and Euler laboratory on the n-torus.

pub mod analysis;
pub mod bchlab;
pub mod dilatation;
pub mod dyson;
pub mod error;
pub mod nsop;
pub mod picard;
pub mod presets;
pub mod spectral;
pub mod stepper;

pub use error::{Error, Result};
