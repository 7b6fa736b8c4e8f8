//! Block splitting for separable objectives with coupled smooth terms:
//!
//! ```text
//! minimize over (x_1, ..., x_m)   sum_i f_i(x_i) + sum_k h_k(sum_i L_ki x_i)
//! ```
//!
//! Each iteration pulls every coupling gradient back to each block and
//! applies the per-block prox:
//!
//! ```text
//! y_{i,n}   = x_{i,n} - gamma_n sum_k L_ki* grad h_k(sum_j L_kj x_{j,n})
//! x_{i,n+1} = prox_{gamma_n f_i}(y_{i,n})
//! ```

use proxkit_core::{stack_blocks, BlockOperator, Vector};

use crate::error::Error;
use crate::prox::ProxFunction;
use crate::smooth::{norm_bound, SmoothFunction};
use crate::solve::{Recorder, SolveReport, SolverConfig, Termination};

/// The generic Lipschitz bound for the coupled gradient on the product
/// space: `p * max_k tau_k sum_i ||L_ki||^2` with `tau_k` the modulus of
/// `grad h_k`. Specific models may certify a sharper constant and build
/// their schedule from it instead.
pub fn block_lipschitz_beta(
    hs: &[SmoothFunction],
    op: &BlockOperator,
) -> Result<f64, Error> {
    let p = op.coupling_count();
    if hs.len() != p {
        return Err(Error::dim("coupling terms", p, hs.len()));
    }
    let mut worst: f64 = 0.0;
    for (k, h) in hs.iter().enumerate() {
        let tau = h.min_valid_beta()?;
        let mut sq = 0.0;
        for i in 0..op.variable_count() {
            if let Some(b) = op.block(k, i) {
                if !b.is_zero() {
                    let n = norm_bound(b)?;
                    sq += n * n;
                }
            }
        }
        worst = worst.max(tau * sq);
    }
    let beta = p as f64 * worst;
    if beta <= 0.0 {
        return Err(Error::Config(
            "coupled gradient bound is zero; nothing to iterate on".into(),
        ));
    }
    Ok(beta)
}

fn block_objective(
    fs: &[ProxFunction],
    hs: &[SmoothFunction],
    op: &BlockOperator,
    xs: &[Vector],
) -> Result<f64, Error> {
    let mut total = 0.0;
    for (f, x) in fs.iter().zip(xs) {
        total += f.value(x)?.to_f64();
    }
    for (k, h) in hs.iter().enumerate() {
        total += h.value(&op.apply_row(k, xs)?)?;
    }
    Ok(total)
}

/// Per-block pulled-back gradients of the coupling terms at `xs`.
fn pulled_gradients(
    hs: &[SmoothFunction],
    op: &BlockOperator,
    xs: &[Vector],
) -> Result<Vec<Vector>, Error> {
    let p = op.coupling_count();
    let m = op.variable_count();
    let mut grads = Vec::with_capacity(p);
    for (k, h) in hs.iter().enumerate() {
        grads.push(h.grad(&op.apply_row(k, xs)?)?);
    }
    let mut pulled = Vec::with_capacity(m);
    for i in 0..m {
        let mut acc = Vector::zeros(op.col_dims()[i]);
        for (k, grad) in grads.iter().enumerate() {
            if let Some(b) = op.block(k, i) {
                acc = acc.add(&b.adjoint_apply(grad)?);
            }
        }
        pulled.push(acc);
    }
    Ok(pulled)
}

/// Runs the block iteration; returns the per-block solution and a report
/// over the stacked variable. The caller vouches that `cfg.schedule.beta`
/// bounds the coupled gradient modulus (see [`block_lipschitz_beta`] for
/// the generic bound).
pub fn block_forward_backward(
    fs: &[ProxFunction],
    hs: &[SmoothFunction],
    op: &BlockOperator,
    x0s: &[Vector],
    cfg: &SolverConfig,
) -> Result<(Vec<Vector>, SolveReport), Error> {
    let m = op.variable_count();
    let p = op.coupling_count();
    if fs.len() != m {
        return Err(Error::dim("block functions", m, fs.len()));
    }
    if hs.len() != p {
        return Err(Error::dim("coupling terms", p, hs.len()));
    }
    if x0s.len() != m {
        return Err(Error::dim("starting blocks", m, x0s.len()));
    }
    for i in 0..m {
        if fs[i].dim() != op.col_dims()[i] {
            return Err(Error::dim(format!("f[{i}]"), op.col_dims()[i], fs[i].dim()));
        }
        if x0s[i].dim() != op.col_dims()[i] {
            return Err(Error::dim(format!("x0[{i}]"), op.col_dims()[i], x0s[i].dim()));
        }
    }
    for (k, h) in hs.iter().enumerate() {
        if h.dim() != op.row_dims()[k] {
            return Err(Error::dim(format!("h[{k}]"), op.row_dims()[k], h.dim()));
        }
    }
    op.validate_coupling()
        .map_err(|e| Error::Config(format!("block coupling: {e}")))?;
    for (i, (f, x0)) in fs.iter().zip(x0s).enumerate() {
        if !f.value(x0)?.is_finite() {
            return Err(Error::Domain(format!(
                "starting block {i} has infinite nonsmooth value"
            )));
        }
    }

    let mut xs = x0s.to_vec();
    let mut pulled = pulled_gradients(hs, op, &xs)?;
    let mut recorder = Recorder::new(
        cfg.trace_every,
        &stack_blocks(&xs),
        block_objective(fs, hs, op, &xs)?,
    );
    let mut termination = Termination::MaxIter;

    for n in 0..cfg.max_iter {
        let gamma = cfg.schedule.gamma(n);
        let mut xs_next = Vec::with_capacity(m);
        let mut disp_sq = 0.0;
        let mut prev_norm_sq = 0.0;
        for i in 0..m {
            let y = xs[i].axpy(-gamma, &pulled[i]);
            let xi = fs[i].prox(gamma, &y)?;
            disp_sq += xi.sub(&xs[i]).norm_sq();
            prev_norm_sq += xs[i].norm_sq();
            xs_next.push(xi);
        }
        let disp = disp_sq.sqrt();
        let converged = disp <= cfg.tol * (1.0 + prev_norm_sq.sqrt());

        let pulled_next = pulled_gradients(hs, op, &xs_next)?;
        let gres = pulled_next
            .iter()
            .zip(&pulled)
            .map(|(a, b)| a.sub(b).norm_sq())
            .sum::<f64>()
            .sqrt();
        recorder.record(
            n + 1,
            block_objective(fs, hs, op, &xs_next)?,
            gamma,
            disp,
            gres,
            &stack_blocks(&xs_next),
        );
        xs = xs_next;
        pulled = pulled_next;
        if converged {
            termination = Termination::TolReached;
            break;
        }
    }
    Ok((xs, recorder.finish(termination)))
}
