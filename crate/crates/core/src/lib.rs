//! Numerical laboratory for Coulomb operators on thin tubes `R x S` and
//! their one-dimensional limits.

pub mod error;
pub mod geometry;
pub mod lab;
pub mod linalg;
pub mod oned;
pub mod quadrature;
pub mod tube;

pub use error::{LabError, Result};
