//! Contraction certification for index-1 time-varying DAE systems.
//!
//! The crate simulates semi-explicit DAE systems `ẇ = f(t,w,z), 0 = g(t,w,z)`,
//! builds the auxiliary linear ODE associated with their variational dynamics,
//! and certifies contraction by bounding the matrix measure of the generalized
//! Jacobian along trajectories (or over boxes for time-invariant systems).
//! Observer synthesis for time-varying ODE plants is included, together with
//! a small expression language for defining systems in text files.
//!
//! Certificates produced here are grid evidence — μ is sampled along computed
//! trajectories or over finite grids — not formal proofs.

pub mod aux;
pub mod certify;
pub mod dae;
pub mod dsl;
pub mod error;
pub mod linalg;
pub mod observer;
pub mod registry;

pub use error::{Error, Result};
