//! Canned reductions of the worked applications onto the solver
//! primitives: sparse recovery, constrained least squares, envelope
//! relaxations of joint/feasibility problems, set projections computed by
//! iteration, averaged and alternating prox loops, and the dual-solved
//! best-approximation and support-regularized models.

use proxkit_core::{BlockOperator, LinearOperator, Vector};

use crate::error::Error;
use crate::prox::{ConvexSet, ProxFunction};
use crate::smooth::{norm_bound, EnvelopeTerm, SmoothFunction};
use crate::solve::{
    block_forward_backward, dual_forward_backward, forward_backward, projected_gradient,
    SolveReport, SolverConfig, StepSchedule,
};

/// Lightweight run parameters; the builders derive the full
/// [`SolverConfig`] from the model's certified Lipschitz bound so a
/// hand-picked step cannot silently leave the admissible interval.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub max_iter: usize,
    pub tol: f64,
    pub trace_every: usize,
    /// Constant step override; `None` picks the default `1/beta`.
    pub step: Option<f64>,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            tol: 1e-9,
            trace_every: 1,
            step: None,
        }
    }
}

impl RunSpec {
    pub fn config_for_beta(&self, beta: f64) -> Result<SolverConfig, Error> {
        let schedule = match self.step {
            Some(gamma) => StepSchedule::constant(beta, gamma)?,
            None => StepSchedule::default_for(beta)?,
        };
        SolverConfig::new(schedule, self.max_iter, self.tol, self.trace_every)
    }
}

/// `min ||x||_1 + 0.5 ||L x - y||^2`; the iteration is componentwise
/// iterative soft thresholding.
pub fn build_lasso(
    op: LinearOperator,
    data: Vector,
) -> Result<(ProxFunction, SmoothFunction), Error> {
    let g = SmoothFunction::least_squares(op, data)?;
    let f = ProxFunction::l1(g.dim())?;
    Ok((f, g))
}

/// `min ||x||_1 + (reg/2) ||x||^2 + 0.5 ||L x - y||^2`; the prox step is
/// the scaled soft threshold.
pub fn build_elastic_net(
    op: LinearOperator,
    data: Vector,
    reg: f64,
) -> Result<(ProxFunction, SmoothFunction), Error> {
    if !(reg.is_finite() && reg > 0.0) {
        return Err(Error::Config(format!(
            "elastic net regularization {reg} must be positive"
        )));
    }
    let g = SmoothFunction::least_squares(op, data)?;
    let f = ProxFunction::l1_plus_quadratic(g.dim(), reg)?;
    Ok((f, g))
}

/// `min over set of 0.5 ||L x - y||^2`, the projected quadratic descent
/// instance.
pub fn build_constrained_ls(
    set: ConvexSet,
    op: LinearOperator,
    data: Vector,
) -> Result<(ProxFunction, SmoothFunction), Error> {
    let g = SmoothFunction::least_squares(op, data)?;
    if set.dim() != g.dim() {
        return Err(Error::dim("constraint set", g.dim(), set.dim()));
    }
    let f = ProxFunction::indicator(set)?;
    Ok((f, g))
}

/// `min f(x) + sum_k w_k env_{rho_k}(h_k)(L_k x)`: the envelope-smoothed
/// relaxation of the joint problem "x minimizes f and every L_k x
/// minimizes h_k". With indicator h_k it is the weighted
/// squared-distance feasibility relaxation.
pub fn build_envelope_relaxation(
    f: ProxFunction,
    terms: Vec<EnvelopeTerm>,
) -> Result<(ProxFunction, SmoothFunction), Error> {
    let g = SmoothFunction::envelope_sum(terms)?;
    if f.dim() != g.dim() {
        return Err(Error::dim("envelope relaxation f", g.dim(), f.dim()));
    }
    Ok((f, g))
}

/// Projects `target` onto the image `L(set)` (assumed closed) by running
/// the constrained quadratic descent and mapping the limit through `L`.
pub fn project_image(
    op: &LinearOperator,
    set: &ConvexSet,
    target: &Vector,
    spec: &RunSpec,
) -> Result<(Vector, SolveReport), Error> {
    let g = SmoothFunction::least_squares(op.clone(), target.clone())?;
    if set.dim() != g.dim() {
        return Err(Error::dim("image projection set", g.dim(), set.dim()));
    }
    let cfg = spec.config_for_beta(g.lipschitz_beta()?)?;
    let x0 = set.witness()?;
    let report = projected_gradient(set, &g, &x0, &cfg)?;
    let point = op.apply(&report.final_point)?;
    Ok((point, report))
}

/// Result of projecting onto a sum of sets: the projection itself, the
/// per-set components that witness it, and the underlying run.
#[derive(Debug, Clone)]
pub struct MinkowskiProjection {
    pub point: Vector,
    pub components: Vec<Vector>,
    pub report: SolveReport,
}

/// Projects `target` onto `C_1 + ... + C_m` (assumed closed) through the
/// product-space reformulation: the summation operator maps the product
/// of the sets onto the sum, so this is image projection with steps in
/// `[eps, 2/m - eps]` (default `1/m`).
pub fn project_minkowski_sum(
    sets: &[ConvexSet],
    target: &Vector,
    spec: &RunSpec,
) -> Result<MinkowskiProjection, Error> {
    if sets.is_empty() {
        return Err(Error::Config("minkowski sum of no sets".into()));
    }
    let dim = target.dim();
    for (i, s) in sets.iter().enumerate() {
        if s.dim() != dim {
            return Err(Error::dim(format!("summand {i}"), dim, s.dim()));
        }
    }
    let m = sets.len();
    let op = LinearOperator::sum_operator(m, dim)?;
    let product = ConvexSet::product(sets.to_vec())?;
    let (point, report) = project_image(&op, &product, target, spec)?;
    let components = proxkit_core::split_blocks(&report.final_point, &vec![dim; m])?;
    Ok(MinkowskiProjection {
        point,
        components,
        report,
    })
}

/// The composition loop `x_{n+1} = prox_{rho f}(prox_{rho h}(x_n))`,
/// which coincides with the main scheme applied to `f + env_rho(h)` at
/// the constant step `rho`. With two indicators it is the alternating
/// projection method. The recorded objective is the envelope-smoothed
/// one.
pub fn alternating_prox(
    f: &ProxFunction,
    h: &ProxFunction,
    rho: f64,
    x0: &Vector,
    spec: &RunSpec,
) -> Result<(Vector, SolveReport), Error> {
    if h.dim() != f.dim() {
        return Err(Error::dim("alternating h", f.dim(), h.dim()));
    }
    let env = SmoothFunction::envelope_sum(vec![EnvelopeTerm {
        weight: 1.0,
        rho,
        op: LinearOperator::identity(f.dim()),
        h: h.clone(),
    }])?;
    // beta = 1/rho, so gamma = rho is exactly the default 1/beta step
    let mut spec_rho = spec.clone();
    spec_rho.step = Some(rho);
    let cfg = spec_rho.config_for_beta(env.lipschitz_beta()?)?;
    if x0.dim() != f.dim() {
        return Err(Error::dim("starting point", f.dim(), x0.dim()));
    }
    if !f.value(x0)?.is_finite() {
        return Err(Error::Domain(
            "starting point has infinite nonsmooth value".into(),
        ));
    }

    let mut x = x0.clone();
    let objective =
        |x: &Vector| -> Result<f64, Error> { Ok(f.value(x)?.to_f64() + env.value(x)?) };
    let mut recorder = crate::solve::Recorder::new(cfg.trace_every, &x, objective(&x)?);
    let mut termination = crate::solve::Termination::MaxIter;
    for n in 0..cfg.max_iter {
        let inner = h.prox(rho, &x)?;
        let x_next = f.prox(rho, &inner)?;
        #[cfg(debug_assertions)]
        {
            // the plain scheme on the envelope takes the same step
            let y = x.axpy(-rho, &env.grad(&x)?);
            let fb_next = f.prox(rho, &y)?;
            debug_assert!(
                x_next.max_abs_diff(&fb_next) <= 1e-12 * (1.0 + x.norm()),
                "composition and envelope step diverged"
            );
        }
        let disp = x_next.dist(&x);
        let converged = disp <= cfg.tol * (1.0 + x.norm());
        recorder.record(n + 1, objective(&x_next)?, rho, disp, 0.0, &x_next);
        x = x_next;
        if converged {
            termination = crate::solve::Termination::TolReached;
            break;
        }
    }
    let report = recorder.finish(termination);
    Ok((report.final_point.clone(), report))
}

/// The averaged-prox loop `x_{n+1} = (1/p) sum_k prox_{rho h_k}(x_n)`,
/// i.e. the main scheme on `sum_k env_rho(h_k)` at step `rho/p`; its
/// limit minimizes the envelope sum.
pub fn barycentric_prox(
    hs: &[ProxFunction],
    rho: f64,
    x0: &Vector,
    spec: &RunSpec,
) -> Result<(Vector, SolveReport), Error> {
    if hs.is_empty() {
        return Err(Error::Config("barycentric prox of no terms".into()));
    }
    let dim = x0.dim();
    for (k, h) in hs.iter().enumerate() {
        if h.dim() != dim {
            return Err(Error::dim(format!("term {k}"), dim, h.dim()));
        }
    }
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::Config(format!("rho {rho} must be positive")));
    }
    if spec.max_iter == 0 || spec.tol <= 0.0 || spec.trace_every == 0 {
        return Err(Error::Config("invalid run parameters".into()));
    }
    let p = hs.len() as f64;
    let gamma = rho / p;
    let objective = |x: &Vector| -> Result<f64, Error> {
        let mut total = 0.0;
        for h in hs {
            total += h.moreau_value(rho, x)?;
        }
        Ok(total)
    };
    let mut recorder = crate::solve::Recorder::new(spec.trace_every, x0, objective(x0)?);
    let mut x = x0.clone();
    let mut termination = crate::solve::Termination::MaxIter;
    for n in 0..spec.max_iter {
        let mut acc = Vector::zeros(dim);
        for h in hs {
            acc = acc.add(&h.prox(rho, &x)?);
        }
        let x_next = acc.scale(1.0 / p);
        let disp = x_next.dist(&x);
        let converged = disp <= spec.tol * (1.0 + x.norm());
        recorder.record(n + 1, objective(&x_next)?, gamma, disp, 0.0, &x_next);
        x = x_next;
        if converged {
            termination = crate::solve::Termination::TolReached;
            break;
        }
    }
    let report = recorder.finish(termination);
    Ok((report.final_point.clone(), report))
}

/// Minimizes `f(x) + ell(w) + ||x + w - z||^2 / (2 rho)` jointly in
/// `(x, w)`. Reflecting `w = z - y` reduces the pair problem to the
/// alternating loop on `f` and `y -> ell(z - y)`; the returned `w` is the
/// partner `prox_{rho ell}(z - x)` of the limit.
pub fn bivariate_coupling(
    f: &ProxFunction,
    ell: &ProxFunction,
    z: &Vector,
    rho: f64,
    x0: &Vector,
    spec: &RunSpec,
) -> Result<(Vector, Vector, SolveReport), Error> {
    if ell.dim() != f.dim() || z.dim() != f.dim() {
        return Err(Error::dim(
            "bivariate coupling",
            f.dim(),
            ell.dim().max(z.dim()),
        ));
    }
    let h = ProxFunction::reflected_translated(ell.clone(), z.clone())?;
    let (x, report) = alternating_prox(f, &h, rho, x0, spec)?;
    let w = ell.prox(rho, &z.sub(&x))?;
    Ok((x, w, report))
}

/// Projects `z` onto `{x in C : L x in D}` by the dual iteration; returns
/// the projection and the dual certificate `v` with
/// `x = proj_C(z - L* v)`. A run that exhausts `max_iter` is reported,
/// not raised.
pub fn best_approximation(
    c_set: &ConvexSet,
    d_set: &ConvexSet,
    op: &LinearOperator,
    z: &Vector,
    spec: &RunSpec,
) -> Result<(Vector, Vector, SolveReport), Error> {
    let phi = ProxFunction::indicator(c_set.clone())?;
    let psi = ProxFunction::indicator(d_set.clone())?;
    let n = norm_bound(op)?;
    let cfg = spec.config_for_beta(n * n)?;
    let r = Vector::zeros(op.rows());
    let v0 = Vector::zeros(op.rows());
    dual_forward_backward(&phi, &psi, op, z, &r, &v0, &cfg)
}

/// Minimizes `phi(x) + sigma_D(L x - r) + 0.5 ||x - z||^2` with compact
/// `D`; the conjugate prox of the support term is the projection onto D.
pub fn support_regularized(
    phi: &ProxFunction,
    d_set: &ConvexSet,
    op: &LinearOperator,
    r: &Vector,
    z: &Vector,
    spec: &RunSpec,
) -> Result<(Vector, Vector, SolveReport), Error> {
    if !d_set.is_compact() {
        return Err(Error::Config(
            "support-regularized model needs a compact set".into(),
        ));
    }
    let psi = ProxFunction::support(d_set.clone())?;
    let n = norm_bound(op)?;
    let cfg = spec.config_for_beta(n * n)?;
    let v0 = if d_set.contains(&Vector::zeros(op.rows()))? {
        Vector::zeros(op.rows())
    } else {
        d_set.witness()?
    };
    dual_forward_backward(phi, &psi, op, z, r, &v0, &cfg)
}

/// Recovers multichannel blocks from mixed observations
/// `y_k ~ sum_i L_ki x_i` under per-block set constraints, through the
/// block iteration with the sharper bound
/// `beta = sum_k sum_i ||L_ki||^2` available for this quadratic model.
pub fn multichannel_recovery(
    sets: &[ConvexSet],
    op: &BlockOperator,
    ys: &[Vector],
    spec: &RunSpec,
) -> Result<(Vec<Vector>, SolveReport), Error> {
    let m = op.variable_count();
    let p = op.coupling_count();
    if sets.len() != m {
        return Err(Error::dim("constraint sets", m, sets.len()));
    }
    if ys.len() != p {
        return Err(Error::dim("observations", p, ys.len()));
    }
    let mut fs = Vec::with_capacity(m);
    let mut x0s = Vec::with_capacity(m);
    for (i, s) in sets.iter().enumerate() {
        if s.dim() != op.col_dims()[i] {
            return Err(Error::dim(format!("set {i}"), op.col_dims()[i], s.dim()));
        }
        x0s.push(s.witness()?);
        fs.push(ProxFunction::indicator(s.clone())?);
    }
    let mut hs = Vec::with_capacity(p);
    let mut beta = 0.0;
    for (k, y) in ys.iter().enumerate() {
        let dk = op.row_dims()[k];
        if y.dim() != dk {
            return Err(Error::dim(format!("observation {k}"), dk, y.dim()));
        }
        hs.push(SmoothFunction::least_squares(
            LinearOperator::identity(dk),
            y.clone(),
        )?);
        for i in 0..m {
            if let Some(b) = op.block(k, i) {
                if !b.is_zero() {
                    let n = norm_bound(b)?;
                    beta += n * n;
                }
            }
        }
    }
    if beta <= 0.0 {
        return Err(Error::Config("all mixing blocks are zero".into()));
    }
    let cfg = spec.config_for_beta(beta)?;
    block_forward_backward(&fs, &hs, op, &x0s, &cfg)
}

/// Convenience wrapper: build and run a composite pair with the default
/// schedule for its certified bound.
pub fn solve_composite(
    f: &ProxFunction,
    g: &SmoothFunction,
    x0: &Vector,
    spec: &RunSpec,
) -> Result<SolveReport, Error> {
    let cfg = spec.config_for_beta(g.lipschitz_beta()?)?;
    forward_backward(f, g, x0, &cfg)
}
