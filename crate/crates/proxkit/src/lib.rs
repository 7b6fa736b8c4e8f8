//! Convex splitting by proximal gradient iterations.
//!
//! The crate is organized around one decomposition: a convex objective
//! `f + g` with `f` accessed through its prox step ([`prox`]) and `g`
//! through its gradient with a certified Lipschitz bound ([`smooth`]).
//! The [`solve`] module runs the iteration schemes on that pair (plain,
//! projected, inertial, dual, and block variants) and [`problems`]
//! reduces the usual applications (lasso, elastic net, constrained least
//! squares, feasibility relaxations, set projections, best
//! approximation) to instances of them.

pub mod error;
pub mod problems;
pub mod prox;
pub mod smooth;
pub mod solve;

pub use error::Error;
pub use prox::{ConvexSet, ExtendedReal, ProxFunction};
pub use smooth::SmoothFunction;
