//! Linear stability of the collinear (Euler) relative equilibria of the
//! planar three-body problem.
//!
//! The pipeline runs mass triple -> central configuration -> mass parameter
//! beta -> monodromy of the essential 4x4 linearized system on the Kepler
//! ellipse -> Morse indices of the associated second-order operator at
//! unit-circle boundary twists -> normal-form classification -> degeneracy
//! curves in the (beta, e) rectangle.

pub mod atlas;
pub mod central_config;
pub mod error;
pub mod index_theory;
mod linalg;
pub mod monodromy;
pub mod spectral;
pub mod tolerances;
pub mod validation;

pub use error::{Error, Result};
