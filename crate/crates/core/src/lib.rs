//! Frobenius-splitting criteria in positive characteristic.
//!
//! The crate provides exact finite-field and sparse-polynomial arithmetic,
//! Fedder-type splitting tests for pairs on the projective line and for
//! hypersurfaces, F-split threshold bounds, an exact intersection-lattice
//! calculus for surfaces, and JSON certificates assembling these
//! computations into the two end-to-end constructions (a klt del Pezzo
//! surface that is not globally F-split, and a canonical threefold
//! singularity that is not F-pure).

pub mod certificate;
pub mod config;
pub mod error;
pub mod finitefield;
pub mod polyfrob;
pub mod rational;
pub mod splitcrit;
pub mod surfcalc;
pub mod threefold;

pub use config::Config;
pub use error::{Error, Result};
