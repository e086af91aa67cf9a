//! Metric invariants of level curves and level surfaces of scalar fields, and numerical
//! verification of the integral identities that relate them.

pub mod catalog;
pub mod coarea;
pub mod contour;
pub mod error;
pub mod evolve;
pub mod field;
pub mod fieldlang;
pub mod geom;
pub mod identities;
pub mod suite;
pub mod surface3d;

pub use error::{Error, Result};
