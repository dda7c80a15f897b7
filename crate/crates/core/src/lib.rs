//! Relative entropy of entanglement with certified bounds, and numerical
//! checks of its continuity bound, the inequalities used to prove it, and
//! the convergence of closest states.

// NaN must fail range checks, so they are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entropy;
pub mod error;
pub mod exec;
pub mod lab;
pub mod linalg;
pub mod sets;
pub mod solver;
pub mod state;

pub use error::{Error, Result};
