//! Space-time discretizations of linear SPDEs driven by square-integrable
//! Lévy noise on the unit interval: stochastic heat, fractional Volterra and
//! wave equations.
//!
//! Everything is represented in two eigenbases: the exact Dirichlet
//! Laplacian modes and the generalized eigenvectors of the P1 finite element
//! space. Solution operators become scalar (heat, Volterra) or 2×2 (wave)
//! mode factors, so strong and weak errors reduce to sums of one-dimensional
//! time integrals.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod noise;
pub mod propagators;
pub mod quadrature;
pub mod spectral;
pub mod study;

pub use error::{Error, Result};
