//! Projectively equivalent surface metrics built from Killing fields and
//! quadratic first integrals, with the numerical machinery to check them:
//! symbolic scalar fields, metric charts, geodesic and Jacobi flows, first
//! integrals, a catalogue of explicit metrics, and sampled deciders for
//! projective equivalence, affinity and isometry.

pub mod acceptance;
pub mod domain;
pub mod error;
pub mod expr;
pub mod flow;
pub mod integrals;
pub mod metric;
pub mod projective;
pub mod sampling;
pub mod verify;
pub mod zoo;

pub use error::{Error, Result};

/// Chart coordinates `(x, y)`.
pub type Point = [f64; 2];
/// Tangent vector components in the coordinate frame.
pub type Vector = [f64; 2];
/// A vector field given by its two coordinate components.
pub type VectorField = [expr::ScalarField; 2];
