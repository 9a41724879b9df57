//! Numerical solver for the forward Dirichlet problem of the two-dimensional
//! electrical impedance equation `div(sigma grad u) = 0` on the unit disk.
//!
//! The pipeline follows pseudoanalytic function theory:
//!
//! 1. a [`conductivity::ConductivityField`] is turned into a generating
//!    sequence of pairs `(p, i/p)` ([`pseudoanalytic::build_sequence`]);
//! 2. formal powers `Z(n)(1, z; 0)` and `Z(n)(i, z; 0)` are integrated along
//!    the rays of a [`pseudoanalytic::RadialMesh`]
//!    ([`formal_powers::build_table`]);
//! 3. the real parts of their boundary traces are orthonormalized and fitted
//!    to the imposed Dirichlet data ([`boundary_solver`]).
//!
//! [`scenario`] ties the stages together behind a JSON run configuration and
//! carries the named presets used by the command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary_solver;
pub mod conductivity;
pub mod error;
pub mod formal_powers;
pub mod pseudoanalytic;
pub mod scenario;
pub mod verification;

pub use error::{Error, Result};
pub use num_complex::Complex64;
