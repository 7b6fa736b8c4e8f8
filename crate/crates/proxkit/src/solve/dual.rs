//! Dual splitting for the composite proximity problem
//!
//! ```text
//! minimize   phi(x) + psi(L x - r) + 0.5 ||x - z||^2
//! ```
//!
//! The iteration runs the plain scheme on the Fenchel dual and recovers
//! the unique primal solution through `x = prox_phi(z - L* v)`:
//!
//! ```text
//! x_n     = prox_phi(z - L* v_n)
//! v_{n+1} = prox_{gamma_n psi*}(v_n + gamma_n (L x_n - r))
//! ```
//!
//! with steps in `[eps, 2/||L||^2 - eps]`.

use proxkit_core::{LinearOperator, Vector};

use crate::error::Error;
use crate::prox::ProxFunction;
use crate::smooth::norm_bound;
use crate::solve::{Recorder, SolveReport, SolverConfig, Termination};

/// Dual objective `env_1(phi*)(z - L* v) + psi*(v) + <v, r>`, where the
/// envelope of the conjugate is obtained from the envelope of `phi`
/// itself through `env_1(phi*)(s) = ||s||^2/2 - env_1(phi)(s)`.
fn dual_objective(
    phi: &ProxFunction,
    psi: &ProxFunction,
    s: &Vector,
    r: &Vector,
    v: &Vector,
) -> Result<f64, Error> {
    let smoothed_conj = 0.5 * s.norm_sq() - phi.moreau_value(1.0, s)?;
    let psi_star = psi
        .conjugate_value(v)?
        .finite()
        .ok_or_else(|| Error::Domain("dual iterate left the conjugate domain".into()))?;
    Ok(smoothed_conj + psi_star + v.dot(r))
}

/// Runs the dual iteration and returns `(x, v, report)`: the primal
/// solution estimate, the dual point, and the dual-side trace (its
/// objective column is the dual objective and is nonincreasing).
///
/// `v0` must have finite conjugate value for `psi`; the zero vector works
/// whenever `psi` is an indicator (its conjugate, a support function,
/// vanishes at the origin).
pub fn dual_forward_backward(
    phi: &ProxFunction,
    psi: &ProxFunction,
    op: &LinearOperator,
    z: &Vector,
    r: &Vector,
    v0: &Vector,
    cfg: &SolverConfig,
) -> Result<(Vector, Vector, SolveReport), Error> {
    if phi.dim() != op.cols() {
        return Err(Error::dim("phi dimension", op.cols(), phi.dim()));
    }
    if z.dim() != op.cols() {
        return Err(Error::dim("z dimension", op.cols(), z.dim()));
    }
    if psi.dim() != op.rows() {
        return Err(Error::dim("psi dimension", op.rows(), psi.dim()));
    }
    if r.dim() != op.rows() {
        return Err(Error::dim("r dimension", op.rows(), r.dim()));
    }
    if v0.dim() != op.rows() {
        return Err(Error::dim("v0 dimension", op.rows(), v0.dim()));
    }
    let norm = norm_bound(op)?;
    let required = norm * norm;
    if cfg.schedule.beta() < required * (1.0 - 1e-9) {
        return Err(Error::Config(format!(
            "schedule beta {} is below the dual Lipschitz bound ||L||^2 = {required}",
            cfg.schedule.beta()
        )));
    }
    if !psi.conjugate_value(v0)?.is_finite() {
        return Err(Error::Domain(
            "v0 has infinite conjugate value for psi".into(),
        ));
    }

    let mut v = v0.clone();
    let mut s = z.sub(&op.adjoint_apply(&v)?);
    let mut x = phi.prox(1.0, &s)?;
    let mut lx = op.apply(&x)?;
    let mut recorder = Recorder::new(
        cfg.trace_every,
        &v,
        dual_objective(phi, psi, &s, r, &v)?,
    );
    let mut termination = Termination::MaxIter;

    for n in 0..cfg.max_iter {
        let gamma = cfg.schedule.gamma(n);
        let w = v.axpy(gamma, &lx.sub(r));
        let v_next = psi.prox_conjugate(gamma, &w)?;
        let disp = v_next.dist(&v);
        let converged = disp <= cfg.tol * (1.0 + v.norm());

        let s_next = z.sub(&op.adjoint_apply(&v_next)?);
        let x_next = phi.prox(1.0, &s_next)?;
        let lx_next = op.apply(&x_next)?;
        // the dual gradient is -L x(v), so this is its residual
        let gres = lx_next.dist(&lx);
        recorder.record(
            n + 1,
            dual_objective(phi, psi, &s_next, r, &v_next)?,
            gamma,
            disp,
            gres,
            &v_next,
        );
        v = v_next;
        s = s_next;
        x = x_next;
        lx = lx_next;
        if converged {
            termination = Termination::TolReached;
            break;
        }
    }
    let _ = s;
    Ok((x, v, recorder.finish(termination)))
}
