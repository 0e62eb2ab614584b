//! Exact piecewise-linear n-component systems: construction, validation,
//! asymptotic summaries, and a lattice cross-check, all over arbitrary-
//! precision rationals.

pub mod asymptotics;
pub mod construct;
pub mod error;
pub mod json;
pub mod lattice;
pub mod mutate;
pub mod piecewise;
pub mod render;
pub mod scalar;
pub mod schedule;
pub mod system;

pub use error::{Error, Result};
pub use piecewise::{PiecewiseLinear, Side};
pub use scalar::Scalar;
pub use system::{validate, Axiom, NSystem, ValidationReport, Violation};
