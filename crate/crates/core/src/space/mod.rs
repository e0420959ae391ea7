//! Discrete functions on `[0,1]^d` and on Gaussian-weighted `R^d`, and the norms errors
//! are measured in.

mod grid;
pub mod io;
mod norm;

pub use grid::{Domain, GridFunction};
pub use norm::{finite_diff_derivative, l2, l2_distance, lp_distance, multi_indices, norm, Exponent, NormSpec};
