//! Inverse-power-law Boltzmann kernel b_s(θ), numerical certification of its
//! quantitative bounds, and an isotropic homogeneous Boltzmann solver used to
//! measure the O(s) hard-sphere limit.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod collision;
pub mod error;
pub mod kernel;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
