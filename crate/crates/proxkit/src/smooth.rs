//! Differentiable convex terms with certified Lipschitz gradients: least
//! squares, weighted multi-term least squares, and envelope-smoothed sums
//! built from the prox catalog.

use proxkit_core::{LinearOperator, Vector, DEFAULT_NORM_MAX_ITER, DEFAULT_NORM_TOL};

use crate::error::Error;
use crate::prox::ProxFunction;

/// Relative inflation applied to estimated operator norms so a step
/// schedule built from the bound stays admissible under estimation error.
const ESTIMATE_MARGIN: f64 = 1e-6;

/// One weighted quadratic data term `(weight/2) ||op x - data||^2`.
#[derive(Debug, Clone)]
pub struct QuadraticTerm {
    pub weight: f64,
    pub op: LinearOperator,
    pub data: Vector,
}

/// One envelope-smoothed term: `weight * env_rho(h)(op x)` where
/// `env_rho(h)` is the Moreau envelope of `h` with parameter `rho`.
#[derive(Debug, Clone)]
pub struct EnvelopeTerm {
    pub weight: f64,
    pub rho: f64,
    pub op: LinearOperator,
    pub h: ProxFunction,
}

/// A convex differentiable function with a formulaic Lipschitz bound for
/// its gradient.
#[derive(Debug, Clone)]
pub struct SmoothFunction {
    kind: SmoothKind,
    dim: usize,
}

#[derive(Debug, Clone)]
enum SmoothKind {
    Zero,
    LeastSquares { op: LinearOperator, data: Vector },
    MultiQuadratic { terms: Vec<QuadraticTerm> },
    EnvelopeSum { terms: Vec<EnvelopeTerm> },
}

/// Exact cached norm when available, inflated power-iteration estimate
/// otherwise.
pub(crate) fn norm_bound(op: &LinearOperator) -> Result<f64, Error> {
    let est = op.operator_norm(DEFAULT_NORM_TOL, DEFAULT_NORM_MAX_ITER)?;
    Ok(if est.exact {
        est.value
    } else {
        est.value * (1.0 + ESTIMATE_MARGIN)
    })
}

impl SmoothFunction {
    /// The zero function. Its gradient is 0-Lipschitz; [`lipschitz_beta`]
    /// reports the conventional bound 1 so step schedules stay well
    /// defined.
    ///
    /// [`lipschitz_beta`]: SmoothFunction::lipschitz_beta
    pub fn zero(dim: usize) -> Result<Self, Error> {
        if dim == 0 {
            return Err(Error::Config("zero function needs dim >= 1".into()));
        }
        Ok(Self {
            kind: SmoothKind::Zero,
            dim,
        })
    }

    /// `x -> 0.5 ||op x - data||^2` with a nonzero operator.
    pub fn least_squares(op: LinearOperator, data: Vector) -> Result<Self, Error> {
        if op.is_zero() {
            return Err(Error::Core(proxkit_core::CoreError::ZeroOperator));
        }
        if data.dim() != op.rows() {
            return Err(Error::dim("least_squares data", op.rows(), data.dim()));
        }
        let dim = op.cols();
        Ok(Self {
            kind: SmoothKind::LeastSquares { op, data },
            dim,
        })
    }

    /// `x -> 0.5 sum_k weight_k ||op_k x - data_k||^2`.
    pub fn multi_quadratic(terms: Vec<QuadraticTerm>) -> Result<Self, Error> {
        if terms.is_empty() {
            return Err(Error::Config("multi_quadratic needs at least one term".into()));
        }
        let dim = terms[0].op.cols();
        for (k, t) in terms.iter().enumerate() {
            if !(t.weight.is_finite() && t.weight > 0.0) {
                return Err(Error::Config(format!(
                    "multi_quadratic weight {k} must be positive"
                )));
            }
            if t.op.is_zero() {
                return Err(Error::Core(proxkit_core::CoreError::ZeroOperator));
            }
            if t.op.cols() != dim {
                return Err(Error::dim(format!("term {k} cols"), dim, t.op.cols()));
            }
            if t.data.dim() != t.op.rows() {
                return Err(Error::dim(format!("term {k} data"), t.op.rows(), t.data.dim()));
            }
        }
        Ok(Self {
            kind: SmoothKind::MultiQuadratic { terms },
            dim,
        })
    }

    /// `x -> sum_k weight_k * env_{rho_k}(h_k)(op_k x)`.
    pub fn envelope_sum(terms: Vec<EnvelopeTerm>) -> Result<Self, Error> {
        if terms.is_empty() {
            return Err(Error::Config("envelope_sum needs at least one term".into()));
        }
        let dim = terms[0].op.cols();
        for (k, t) in terms.iter().enumerate() {
            if !(t.weight.is_finite() && t.weight > 0.0) {
                return Err(Error::Config(format!(
                    "envelope weight {k} must be positive"
                )));
            }
            if !(t.rho.is_finite() && t.rho > 0.0) {
                return Err(Error::Config(format!(
                    "envelope parameter rho {k} must be positive"
                )));
            }
            if t.op.is_zero() {
                return Err(Error::Core(proxkit_core::CoreError::ZeroOperator));
            }
            if t.op.cols() != dim {
                return Err(Error::dim(format!("term {k} cols"), dim, t.op.cols()));
            }
            if t.h.dim() != t.op.rows() {
                return Err(Error::dim(format!("term {k} h"), t.op.rows(), t.h.dim()));
            }
        }
        Ok(Self {
            kind: SmoothKind::EnvelopeSum { terms },
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero_kind(&self) -> bool {
        matches!(self.kind, SmoothKind::Zero)
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            SmoothKind::Zero => "zero",
            SmoothKind::LeastSquares { .. } => "least_squares",
            SmoothKind::MultiQuadratic { .. } => "multi_quadratic",
            SmoothKind::EnvelopeSum { .. } => "envelope_sum",
        }
    }

    fn check_dim(&self, x: &Vector, context: &str) -> Result<(), Error> {
        if x.dim() != self.dim {
            return Err(Error::dim(context, self.dim, x.dim()));
        }
        Ok(())
    }

    /// Function value; finite for every x.
    pub fn value(&self, x: &Vector) -> Result<f64, Error> {
        self.check_dim(x, "value")?;
        match &self.kind {
            SmoothKind::Zero => Ok(0.0),
            SmoothKind::LeastSquares { op, data } => {
                Ok(0.5 * op.apply(x)?.sub(data).norm_sq())
            }
            SmoothKind::MultiQuadratic { terms } => {
                let mut total = 0.0;
                for t in terms {
                    total += 0.5 * t.weight * t.op.apply(x)?.sub(&t.data).norm_sq();
                }
                Ok(total)
            }
            SmoothKind::EnvelopeSum { terms } => {
                // value goes through the prox, the same source of truth the
                // gradient uses
                let mut total = 0.0;
                for t in terms {
                    total += t.weight * t.h.moreau_value(t.rho, &t.op.apply(x)?)?;
                }
                Ok(total)
            }
        }
    }

    /// Exact gradient for the kind.
    pub fn grad(&self, x: &Vector) -> Result<Vector, Error> {
        self.check_dim(x, "grad")?;
        match &self.kind {
            SmoothKind::Zero => Ok(Vector::zeros(self.dim)),
            SmoothKind::LeastSquares { op, data } => {
                Ok(op.adjoint_apply(&op.apply(x)?.sub(data))?)
            }
            SmoothKind::MultiQuadratic { terms } => {
                let mut acc = Vector::zeros(self.dim);
                for t in terms {
                    let r = t.op.apply(x)?.sub(&t.data);
                    acc = acc.axpy(t.weight, &t.op.adjoint_apply(&r)?);
                }
                Ok(acc)
            }
            SmoothKind::EnvelopeSum { terms } => {
                let mut acc = Vector::zeros(self.dim);
                for t in terms {
                    let lx = t.op.apply(x)?;
                    let p = t.h.prox(t.rho, &lx)?;
                    let pulled = t.op.adjoint_apply(&lx.sub(&p))?;
                    acc = acc.axpy(t.weight / t.rho, &pulled);
                }
                Ok(acc)
            }
        }
    }

    /// Formulaic Lipschitz bound for the gradient: `||L||^2` for a single
    /// quadratic, `sum_k w_k ||L_k||^2` for several, and
    /// `sum_k w_k ||L_k||^2 / rho_k` for envelope sums.
    pub fn lipschitz_beta(&self) -> Result<f64, Error> {
        match &self.kind {
            SmoothKind::Zero => Ok(1.0),
            _ => self.modulus_upper_bound(),
        }
    }

    /// Like [`lipschitz_beta`](SmoothFunction::lipschitz_beta) but reports
    /// 0 for the zero function: any schedule is admissible for it.
    pub(crate) fn min_valid_beta(&self) -> Result<f64, Error> {
        match &self.kind {
            SmoothKind::Zero => Ok(0.0),
            _ => self.modulus_upper_bound(),
        }
    }

    fn modulus_upper_bound(&self) -> Result<f64, Error> {
        match &self.kind {
            SmoothKind::Zero => Ok(0.0),
            SmoothKind::LeastSquares { op, .. } => {
                let n = norm_bound(op)?;
                Ok(n * n)
            }
            SmoothKind::MultiQuadratic { terms } => {
                let mut total = 0.0;
                for t in terms {
                    let n = norm_bound(&t.op)?;
                    total += t.weight * n * n;
                }
                Ok(total)
            }
            SmoothKind::EnvelopeSum { terms } => {
                let mut total = 0.0;
                for t in terms {
                    let n = norm_bound(&t.op)?;
                    total += t.weight * n * n / t.rho;
                }
                Ok(total)
            }
        }
    }
}
