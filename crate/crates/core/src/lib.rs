//! Exact and Monte Carlo analysis of the Burnside process on binary strings.
//!
//! The lumped chain lives on `{0, ..., n}` (the number of ones). Its Ewens
//! twist with parameter `theta` has a beta-binomial stationary law and Hahn
//! polynomial eigenfunctions; `theta = 1` is the untwisted chain, whose
//! eigenfunctions are the discrete Chebyshev polynomials. The continuous
//! limit on `[0, 1]` has Jacobi polynomial eigenfunctions.
//!
//! Everything that can be computed exactly is computed in [`Rational`]
//! arithmetic; floats appear only at the boundary (eigen-solver
//! cross-checks, Monte Carlo, quadrature).

pub mod chains;
pub mod distributions;
pub mod export;
pub mod hypergeom;
pub mod orthopoly;
pub mod quadrature;
pub mod rational;
pub mod spectral;

mod error;

pub use error::{Error, Result};
pub use rational::Rational;

/// Crate version, embedded in exported metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
