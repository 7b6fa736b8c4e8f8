//! Dense finite-dimensional linear algebra used by the proxkit solvers.
//!
//! Everything here is deliberately desk-scale: vectors are `Vec<f64>`,
//! operators are dense row-major matrices, and the spectral norm is
//! estimated by power iteration with a deterministic start so repeated
//! runs produce identical step sizes downstream.

mod block;
mod error;
mod operator;
mod vector;

pub use block::{split_blocks, stack_blocks, BlockOperator};
pub use error::CoreError;
pub use operator::{LinearOperator, NormEstimate, DEFAULT_NORM_MAX_ITER, DEFAULT_NORM_TOL};
pub use vector::Vector;
