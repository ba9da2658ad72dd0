//! Homogenized Landau-de Gennes energies for dilute nematic colloids.
//!
//! The crate computes the effective bulk potential generated by many small
//! inclusions carrying a surface-anchoring energy, designs anchoring energies
//! that produce prescribed bulk coefficients, and checks the limit behaviour
//! with a finite-difference Q-tensor minimiser.

// `!(x > 0.0)` is used on purpose so that NaN fails every gate
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod energies;
pub mod error;
pub mod homogenization;
pub mod lattice;
pub mod numerics;
pub mod probes;
pub mod qtensor;
pub mod solver;

pub use error::{Error, Result};
pub use qtensor::QTensor;
