//! Geodesics, Jacobi fields and return maps.

mod closure;
mod geodesic;
mod jacobi;
pub mod ode;

pub use closure::{detect_closure, ClosureOptions, ClosureOutcome};
pub use geodesic::{integrate_geodesic, GeodesicOptions, GeodesicState, GeodesicTrace, Termination};
pub use jacobi::{find_conjugate_points, integrate_jacobi, ConjugateScan, JacobiState};
pub use ode::Tolerances;
