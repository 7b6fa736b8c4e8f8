//! Proximity operators, projections, conjugacy via the Moreau
//! decomposition, and Moreau envelopes — the nonsmooth side of every
//! iteration in this crate.

mod functions;
mod sets;

pub use functions::ProxFunction;
pub use sets::ConvexSet;

use std::ops::Add;

/// Absolute tolerance on a set's defining residual when deciding
/// membership for indicator values and structured support functions.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// A value in `(-inf, +inf]`: finite, or the +infinity marker used by
/// indicator-type functions. Never negative infinity and never NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PlusInfinity,
}

impl ExtendedReal {
    /// Classifies a raw float; +inf maps to the marker. NaN and -inf are
    /// invariant violations and panic.
    pub fn from_value(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtendedReal::PlusInfinity
        } else {
            assert!(v.is_finite(), "extended real cannot hold {v}");
            ExtendedReal::Finite(v)
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    /// The value as a float, with `+inf` for the infinite marker.
    pub fn to_f64(&self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => *v,
            ExtendedReal::PlusInfinity => f64::INFINITY,
        }
    }

    /// Finite payload, if any.
    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(*v),
            ExtendedReal::PlusInfinity => None,
        }
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: ExtendedReal) -> ExtendedReal {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::from_value(a + b),
            _ => ExtendedReal::PlusInfinity,
        }
    }
}
