//! The main splitting iteration and its projected and inertial variants.

use proxkit_core::Vector;

use crate::error::Error;
use crate::prox::{ConvexSet, ProxFunction};
use crate::smooth::SmoothFunction;
use crate::solve::{Recorder, SolveReport, SolverConfig, Termination};

fn composite_value(f: &ProxFunction, g: &SmoothFunction, x: &Vector) -> Result<f64, Error> {
    Ok(f.value(x)?.to_f64() + g.value(x)?)
}

fn validate_pair(
    f: &ProxFunction,
    g: &SmoothFunction,
    x0: &Vector,
    cfg: &SolverConfig,
) -> Result<(), Error> {
    if g.dim() != f.dim() {
        return Err(Error::dim("smooth term", f.dim(), g.dim()));
    }
    if x0.dim() != f.dim() {
        return Err(Error::dim("starting point", f.dim(), x0.dim()));
    }
    let required = g.min_valid_beta()?;
    if cfg.schedule.beta() < required * (1.0 - 1e-9) {
        return Err(Error::Config(format!(
            "schedule beta {} is below the gradient Lipschitz bound {required}",
            cfg.schedule.beta()
        )));
    }
    if !f.value(x0)?.is_finite() {
        return Err(Error::Domain(
            "starting point has infinite nonsmooth value".into(),
        ));
    }
    Ok(())
}

/// One gradient step on `g` followed by one prox step on `f` per
/// iteration:
///
/// ```text
/// y_n     = x_n - gamma_n * grad g(x_n)
/// x_{n+1} = prox_{gamma_n f}(y_n)
/// ```
///
/// With `f = 0` this is plain gradient descent; with `g = 0` it is the
/// proximal point iteration (both hold bitwise, not just to rounding).
/// Stops when the relative displacement drops below `cfg.tol` or after
/// `cfg.max_iter` steps. The recorded objective values are nonincreasing.
pub fn forward_backward(
    f: &ProxFunction,
    g: &SmoothFunction,
    x0: &Vector,
    cfg: &SolverConfig,
) -> Result<SolveReport, Error> {
    validate_pair(f, g, x0, cfg)?;
    let mut x = x0.clone();
    let mut grad = g.grad(&x)?;
    let mut recorder = Recorder::new(cfg.trace_every, &x, composite_value(f, g, &x)?);
    let mut termination = Termination::MaxIter;

    for n in 0..cfg.max_iter {
        let gamma = cfg.schedule.gamma(n);
        let y = x.axpy(-gamma, &grad);
        let x_next = f.prox(gamma, &y)?;
        let grad_next = g.grad(&x_next)?;
        let disp = x_next.dist(&x);
        let gres = grad_next.sub(&grad).norm();
        let converged = disp <= cfg.tol * (1.0 + x.norm());
        recorder.record(
            n + 1,
            composite_value(f, g, &x_next)?,
            gamma,
            disp,
            gres,
            &x_next,
        );
        x = x_next;
        grad = grad_next;
        if converged {
            termination = Termination::TolReached;
            break;
        }
    }
    Ok(recorder.finish(termination))
}

/// The constrained specialization: the prox step becomes a projection.
/// Requires a feasible start and shares every contract of
/// [`forward_backward`] with `f` the indicator of `set`.
pub fn projected_gradient(
    set: &ConvexSet,
    g: &SmoothFunction,
    x0: &Vector,
    cfg: &SolverConfig,
) -> Result<SolveReport, Error> {
    if x0.dim() != set.dim() {
        return Err(Error::dim("starting point", set.dim(), x0.dim()));
    }
    if !set.contains(x0)? {
        return Err(Error::Domain(
            "starting point is outside the constraint set".into(),
        ));
    }
    let f = ProxFunction::indicator(set.clone())?;
    forward_backward(&f, g, x0, cfg)
}

/// Extrapolation state of the inertial variant.
///
/// The scalar sequence obeys `t_{n+1} = (1 + sqrt(4 t_n^2 + 1)) / 2` from
/// `t_0 = 1` and is nondecreasing; the extrapolated point is
/// `z_{n+1} = x_n + lambda_n (x_{n+1} - x_n)` with
/// `lambda_n = 1 + (t_n - 1) / t_{n+1}`.
#[derive(Debug, Clone)]
pub struct InertialState {
    pub t: f64,
    pub extrapolated: Vector,
    pub x_prev: Vector,
}

impl InertialState {
    pub fn start(x0: Vector) -> Self {
        Self {
            t: 1.0,
            extrapolated: x0.clone(),
            x_prev: x0,
        }
    }

    /// Advances the scalar recursion and the extrapolation after a new
    /// iterate.
    pub fn advance(&mut self, x_next: &Vector) {
        let t_next = 0.5 * (1.0 + (4.0 * self.t * self.t + 1.0).sqrt());
        let lambda = 1.0 + (self.t - 1.0) / t_next;
        self.extrapolated = self.x_prev.add(&x_next.sub(&self.x_prev).scale(lambda));
        self.t = t_next;
        self.x_prev = x_next.clone();
    }
}

/// The inertial variant with the fixed step `1/beta`:
///
/// ```text
/// y_n     = z_n - (1/beta) grad g(z_n)
/// x_{n+1} = prox_{f/beta}(y_n)
/// z_{n+1} = x_n + lambda_n (x_{n+1} - x_n)
/// ```
///
/// Faster on objective values than [`forward_backward`] but the recorded
/// objective trace is not guaranteed monotone, and no restart heuristics
/// are applied.
pub fn fista(
    f: &ProxFunction,
    g: &SmoothFunction,
    x0: &Vector,
    cfg: &SolverConfig,
) -> Result<SolveReport, Error> {
    validate_pair(f, g, x0, cfg)?;
    let gamma = 1.0 / cfg.schedule.beta();
    let mut state = InertialState::start(x0.clone());
    let mut grad_x = g.grad(x0)?;
    let mut recorder = Recorder::new(cfg.trace_every, x0, composite_value(f, g, x0)?);
    let mut termination = Termination::MaxIter;

    for n in 0..cfg.max_iter {
        let grad_z = g.grad(&state.extrapolated)?;
        let y = state.extrapolated.axpy(-gamma, &grad_z);
        let x_next = f.prox(gamma, &y)?;
        let disp = x_next.dist(&state.x_prev);
        let converged = disp <= cfg.tol * (1.0 + state.x_prev.norm());
        let grad_next = g.grad(&x_next)?;
        let gres = grad_next.sub(&grad_x).norm();
        recorder.record(
            n + 1,
            composite_value(f, g, &x_next)?,
            gamma,
            disp,
            gres,
            &x_next,
        );
        grad_x = grad_next;
        state.advance(&x_next);
        if converged {
            termination = Termination::TolReached;
            break;
        }
    }
    Ok(recorder.finish(termination))
}
