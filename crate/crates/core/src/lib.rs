//! Effective one-dimensional Hamiltonians for thin magnetic quantum
//! waveguides, and finite-volume reference solvers for the full tube.

pub mod curve;
pub mod effective;
pub mod eigen;
pub mod error;
pub mod expr;
pub mod fiber;
pub mod harness;
pub mod magnetics;
pub mod quad;
pub mod reference;
pub mod vec3;

pub use error::{Error, Result};
