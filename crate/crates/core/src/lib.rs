//! Numerical verification of harmonic sections and harmonic maps of tangent
//! bundles carrying the two-parameter family of generalised Cheeger–Gromoll
//! metrics h_{p,q}.

pub mod bundle;
pub mod classification;
pub mod cli;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod harmonicity;
pub mod operators;
pub mod oracle;
pub mod sampling;

pub use error::{Error, Result};
