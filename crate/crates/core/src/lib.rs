//! Pseudo-spectral machinery for constructing pairs of distinct stationary
//! weak solutions of the forced surface quasi-geostrophic equation on the
//! 2-torus via a two-half-step convex-integration iteration.

pub mod blocks;
pub mod corpus;
pub mod corrector;
pub mod engine;
pub mod error;
pub mod fft2;
pub mod field;
pub mod multiplier;
pub mod norms;
pub mod product;
pub mod report;
pub mod schedule;

pub use error::{Error, Result};
pub use fft2::Fft2;
pub use field::{SpectralField, TorusField};
