//! Log-gamma directed polymers on quadrant, trapezoidal and symmetric
//! domains: partition functions, geometric RSK, Whittaker integrals,
//! contour-integral Laplace transforms and limit laws.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod grsk;
pub mod harness;
pub mod laplace;
pub mod polymer;
pub mod quad;
pub mod specialfn;
pub mod suites;
pub mod whittaker;

pub use error::{Error, Result};
