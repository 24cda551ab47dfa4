//! Transparent boundary conditions for the 1D Helmholtz equation in
//! quasiperiodic media, computed by lifting each exterior half-line to a
//! periodic 2D half-guide.

pub mod cell1d;
pub mod cell2d;
pub mod error;
pub mod fem;
pub mod halfguide;
pub mod media;
pub mod oracle;
pub mod riccati;
pub mod wholeline;

pub use error::{Error, Result};
pub use num_complex::Complex64;
