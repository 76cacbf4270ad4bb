//! loclab: a numerical laboratory for the stochastic localization process
//! of isotropic log-concave measures.
//!
//! The crate simulates the process in its exponential-tilt form, tracks the
//! eigenvalues of the covariance process, builds the test potentials and the
//! time ladder used in tail-probability arguments, and certifies the explicit
//! constant inequalities those arguments rely on.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod harness;
pub mod ladder;
pub mod localization;
pub mod measures;
pub mod numerics;
pub mod potentials;

pub use error::{LoclabError, Result};
