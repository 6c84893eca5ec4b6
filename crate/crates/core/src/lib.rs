//! Harmonic analysis on the p-adic Vilenkin group at finite level.
//!
//! The crate builds generalized Rademacher chaos, the Vilenkin–Chrestenson
//! transform, Riesz product measures and the coefficient-shaping measures
//! derived from them, and uses these to check Sidon-type inequalities with
//! exponent `2d/(d+1)` numerically.
//!
//! All mathematics is pure; file formats are plain serde types in [`format`]
//! and the only I/O lives in the command-line crate.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod format;
pub mod interp;
pub mod measures;
pub mod padic;
pub mod poly;
pub mod tol;
pub mod transform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
