//! Sparse eigenbasis approximation for post-processing the output of
//! spectral clustering and coherent-set detection.
//!
//! Given an orthonormal block of leading eigenvectors, [`seba::seba`] finds a
//! rotated sparse basis of (nearly) the same span whose columns are
//! individual features. The [`heuristics`] module helps choose how many
//! vectors to use, [`thresholding`] turns sparse columns into hard labels,
//! and [`dynamics`] generates fixtures to try it on.

pub mod dynamics;
pub mod error;
pub mod heuristics;
pub mod io;
pub mod linalg;
pub mod seba;
pub mod thresholding;

pub use error::{Error, Result};
