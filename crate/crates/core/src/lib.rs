//! Tester-learner for Massart-noise halfspaces under Gaussian marginals,
//! together with the multiplicative sandwiching-polynomial construction it
//! rests on.

// Negated float comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod data;
pub mod experiment;
pub mod learner;
pub mod limits;
pub mod poly;
pub mod quadrature;
pub mod sandwich;
pub mod scalar;
pub mod special;
pub mod tester;

pub use limits::Limits;
pub use poly::{MultiIndex, PolyError, Polynomial};
pub use scalar::Scalar;
