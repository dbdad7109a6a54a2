//! Finite-difference solvers for space-fractional (Riesz) diffusion equations
//! driven by a Caputo-Fabrizio time derivative.
//!
//! The time derivative is discretized with a second-order L1 formula whose
//! history sum is carried recursively in O(1) memory per unknown; the Riesz
//! operator uses a second-order Toeplitz-like stencil of coefficients
//! `g_m`. One-dimensional problems are advanced with a dense Cholesky factor
//! computed once per solve, two-dimensional problems with a matrix-free
//! conjugate-gradient solve on the Kronecker sum of two line operators.
//!
//! Module map:
//!
//! * [`riesz`]: coefficients, matrix assembly and coefficient sign checks.
//! * [`cf_time`]: time weights, recursive history, oracles.
//! * [`solver`]: 1D / 2D stepping, full solves and stability experiments.
//! * [`manufactured`]: closed-form exact solutions and forcing terms.
//! * [`analysis`]: error norms and refinement tables.
//! * [`cli`]: the `cf-fracdiff` command-line front end.

pub mod analysis;
pub mod cf_time;
pub mod cli;
mod error;
pub mod manufactured;
pub mod riesz;
pub mod solver;
mod special;

pub use error::{Error, Result};
pub use special::gamma;
