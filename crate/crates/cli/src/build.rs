//! Converts parsed problem files into library objects and runs them.

use proxkit::problems::{
    alternating_prox, barycentric_prox, best_approximation, bivariate_coupling,
    build_constrained_ls, build_elastic_net, build_envelope_relaxation, build_lasso,
    multichannel_recovery, project_image, project_minkowski_sum, support_regularized, RunSpec,
};
use proxkit::prox::{ConvexSet, ProxFunction};
use proxkit::smooth::{EnvelopeTerm, QuadraticTerm, SmoothFunction};
use proxkit::solve::{fista, forward_backward, projected_gradient, SolveReport, SolverConfig};
use proxkit_core::{BlockOperator, LinearOperator, Vector};

use crate::error::CliError;
use crate::schema::{
    Algorithm, BlockData, MatrixData, ProblemFile, ProblemKind, ProxData, SetData, SmoothData,
    SolverSettings,
};

pub fn to_vector(data: &[f64], what: &str) -> Result<Vector, CliError> {
    Vector::from_slice(data).map_err(|e| CliError::Parse(format!("{what}: {e}")))
}

pub fn to_matrix(m: &MatrixData, what: &str) -> Result<LinearOperator, CliError> {
    LinearOperator::new(m.rows, m.cols, m.entries.clone())
        .map_err(|e| CliError::Parse(format!("{what}: {e}")))
}

pub fn to_set(s: &SetData) -> Result<ConvexSet, CliError> {
    Ok(match s {
        SetData::WholeSpace { dim } => ConvexSet::whole_space(*dim)?,
        SetData::Box { lo, hi } => ConvexSet::box_set(lo.clone(), hi.clone())?,
        SetData::Ball { center, radius } => {
            ConvexSet::ball(to_vector(center, "ball.center")?, *radius)?
        }
        SetData::Halfspace { normal, offset } => {
            ConvexSet::halfspace(to_vector(normal, "halfspace.normal")?, *offset)?
        }
        SetData::Hyperplane { normal, offset } => {
            ConvexSet::hyperplane(to_vector(normal, "hyperplane.normal")?, *offset)?
        }
        SetData::Singleton { point } => {
            ConvexSet::singleton(to_vector(point, "singleton.point")?)
        }
        SetData::Affine { a, c } => {
            ConvexSet::affine(to_matrix(a, "affine.a")?, to_vector(c, "affine.c")?)?
        }
        SetData::NonnegOrthant { dim } => ConvexSet::nonneg_orthant(*dim)?,
        SetData::Product { factors } => {
            let fs = factors.iter().map(to_set).collect::<Result<Vec<_>, _>>()?;
            ConvexSet::product(fs)?
        }
    })
}

pub fn to_prox(p: &ProxData) -> Result<ProxFunction, CliError> {
    Ok(match p {
        ProxData::Zero { dim } => ProxFunction::zero(*dim)?,
        ProxData::L1 { dim } => ProxFunction::l1(*dim)?,
        ProxData::L1PlusQuadratic { dim, beta } => ProxFunction::l1_plus_quadratic(*dim, *beta)?,
        ProxData::Indicator { set } => ProxFunction::indicator(to_set(set)?)?,
        ProxData::Separable { components, basis } => {
            let comps = components.iter().map(to_prox).collect::<Result<Vec<_>, _>>()?;
            let b = basis
                .as_ref()
                .map(|m| to_matrix(m, "separable.basis"))
                .transpose()?;
            ProxFunction::separable(comps, b)?
        }
        ProxData::Scaled { base, omega } => ProxFunction::scaled(to_prox(base)?, *omega)?,
        ProxData::ReflectedTranslated { base, z } => ProxFunction::reflected_translated(
            to_prox(base)?,
            to_vector(z, "reflected_translated.z")?,
        )?,
        ProxData::Support { set } => ProxFunction::support(to_set(set)?)?,
        ProxData::Conjugate { base } => ProxFunction::conjugate(to_prox(base)?)?,
        ProxData::QuadraticData { l, y } => ProxFunction::quadratic_data(
            to_matrix(l, "quadratic_data.L")?,
            to_vector(y, "quadratic_data.y")?,
        )?,
    })
}

pub fn to_smooth(g: &SmoothData) -> Result<SmoothFunction, CliError> {
    Ok(match g {
        SmoothData::Zero { dim } => SmoothFunction::zero(*dim)?,
        SmoothData::LeastSquares { l, y } => SmoothFunction::least_squares(
            to_matrix(l, "least_squares.L")?,
            to_vector(y, "least_squares.y")?,
        )?,
        SmoothData::MultiQuadratic { terms } => {
            let ts = terms
                .iter()
                .map(|t| {
                    Ok(QuadraticTerm {
                        weight: t.omega,
                        op: to_matrix(&t.l, "multi_quadratic.L")?,
                        data: to_vector(&t.y, "multi_quadratic.y")?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            SmoothFunction::multi_quadratic(ts)?
        }
        SmoothData::EnvelopeSum { terms } => {
            SmoothFunction::envelope_sum(to_envelope_terms(terms)?)?
        }
    })
}

fn to_envelope_terms(
    terms: &[crate::schema::EnvelopeTermData],
) -> Result<Vec<EnvelopeTerm>, CliError> {
    terms
        .iter()
        .map(|t| {
            Ok(EnvelopeTerm {
                weight: t.omega,
                rho: t.rho,
                op: to_matrix(&t.l, "envelope.L")?,
                h: to_prox(&t.h)?,
            })
        })
        .collect()
}

pub fn to_block(b: &BlockData) -> Result<BlockOperator, CliError> {
    let p = b.row_dims.len();
    let m = b.col_dims.len();
    let mut grid: Vec<Option<LinearOperator>> = vec![None; p * m];
    for e in &b.blocks {
        grid[e.k * m + e.i] = Some(to_matrix(&e.l, "block.L")?);
    }
    BlockOperator::new(b.row_dims.clone(), b.col_dims.clone(), grid)
        .map_err(|e| CliError::Parse(format!("payload.blocks: {e}")))
}

/// A problem file converted into library objects, ready to run.
pub enum Prepared {
    Composite {
        f: ProxFunction,
        g: SmoothFunction,
        x0: Vector,
        set: Option<ConvexSet>,
        mu: Option<f64>,
    },
    Minkowski {
        sets: Vec<ConvexSet>,
        target: Vector,
    },
    Image {
        op: LinearOperator,
        set: ConvexSet,
        target: Vector,
    },
    Alternating {
        f: ProxFunction,
        h: ProxFunction,
        rho: f64,
        x0: Vector,
    },
    Barycentric {
        hs: Vec<ProxFunction>,
        rho: f64,
        x0: Vector,
    },
    Bivariate {
        f: ProxFunction,
        ell: ProxFunction,
        z: Vector,
        rho: f64,
        x0: Vector,
    },
    BestApprox {
        c: ConvexSet,
        d: ConvexSet,
        op: LinearOperator,
        z: Vector,
    },
    SupportReg {
        phi: ProxFunction,
        d: ConvexSet,
        op: LinearOperator,
        r: Vector,
        z: Vector,
    },
    Block {
        sets: Vec<ConvexSet>,
        op: BlockOperator,
        ys: Vec<Vector>,
    },
}

/// Closed-form optimal value for separable sparse recovery: available
/// when the data operator is square, diagonal, and positive.
fn lasso_mu(op: &LinearOperator, y: &Vector) -> Option<f64> {
    if op.rows() != op.cols() {
        return None;
    }
    let n = op.rows();
    let mut diag = Vec::with_capacity(n);
    for r in 0..n {
        for c in 0..n {
            let v = op.entry(r, c);
            if r == c {
                if v <= 0.0 {
                    return None;
                }
                diag.push(v);
            } else if v != 0.0 {
                return None;
            }
        }
    }
    let x_star = proxkit_oracle::subgradient_solve_separable_l1(&diag, y.as_slice()).ok()?;
    let l1: f64 = x_star.iter().map(|v| v.abs()).sum();
    let resid: f64 = x_star
        .iter()
        .zip(diag.iter().zip(y.iter()))
        .map(|(x, (a, b))| (a * x - b).powi(2))
        .sum();
    Some(l1 + 0.5 * resid)
}

pub fn prepare(file: &ProblemFile) -> Result<Prepared, CliError> {
    Ok(match &file.problem {
        ProblemKind::Lasso { l, y, x0 } => {
            let op = to_matrix(l, "payload.L")?;
            let data = to_vector(y, "payload.y")?;
            let mu = lasso_mu(&op, &data);
            let (f, g) = build_lasso(op, data)?;
            let x0 = match x0 {
                Some(v) => to_vector(v, "payload.x0")?,
                None => Vector::zeros(g.dim()),
            };
            Prepared::Composite {
                f,
                g,
                x0,
                set: None,
                mu,
            }
        }
        ProblemKind::ElasticNet { l, y, beta_reg, x0 } => {
            let op = to_matrix(l, "payload.L")?;
            let data = to_vector(y, "payload.y")?;
            let (f, g) = build_elastic_net(op, data, *beta_reg)?;
            let x0 = match x0 {
                Some(v) => to_vector(v, "payload.x0")?,
                None => Vector::zeros(g.dim()),
            };
            Prepared::Composite {
                f,
                g,
                x0,
                set: None,
                mu: None,
            }
        }
        ProblemKind::ConstrainedLs { set, l, y, x0 } => {
            let cset = to_set(set)?;
            let op = to_matrix(l, "payload.L")?;
            let data = to_vector(y, "payload.y")?;
            let (f, g) = build_constrained_ls(cset.clone(), op, data)?;
            let x0 = match x0 {
                Some(v) => to_vector(v, "payload.x0")?,
                None => cset.witness()?,
            };
            Prepared::Composite {
                f,
                g,
                x0,
                set: Some(cset),
                mu: None,
            }
        }
        ProblemKind::Envelope { f, terms, x0 } => {
            let fp = to_prox(f)?;
            let (fp, g) = build_envelope_relaxation(fp, to_envelope_terms(terms)?)?;
            let x0 = match x0 {
                Some(v) => to_vector(v, "payload.x0")?,
                None => fp.feasible_point().clone(),
            };
            Prepared::Composite {
                f: fp,
                g,
                x0,
                set: None,
                mu: None,
            }
        }
        ProblemKind::MinkowskiProjection { sets, y } => Prepared::Minkowski {
            sets: sets.iter().map(to_set).collect::<Result<Vec<_>, _>>()?,
            target: to_vector(y, "payload.y")?,
        },
        ProblemKind::ImageProjection { l, set, y } => Prepared::Image {
            op: to_matrix(l, "payload.L")?,
            set: to_set(set)?,
            target: to_vector(y, "payload.y")?,
        },
        ProblemKind::Alternating { f, h, rho, x0 } => Prepared::Alternating {
            f: to_prox(f)?,
            h: to_prox(h)?,
            rho: *rho,
            x0: to_vector(x0, "payload.x0")?,
        },
        ProblemKind::Barycentric { h_list, rho, x0 } => Prepared::Barycentric {
            hs: h_list.iter().map(to_prox).collect::<Result<Vec<_>, _>>()?,
            rho: *rho,
            x0: to_vector(x0, "payload.x0")?,
        },
        ProblemKind::Bivariate { f, ell, z, rho, x0 } => Prepared::Bivariate {
            f: to_prox(f)?,
            ell: to_prox(ell)?,
            z: to_vector(z, "payload.z")?,
            rho: *rho,
            x0: to_vector(x0, "payload.x0")?,
        },
        ProblemKind::BestApproximation { c, d, l, z } => Prepared::BestApprox {
            c: to_set(c)?,
            d: to_set(d)?,
            op: to_matrix(l, "payload.L")?,
            z: to_vector(z, "payload.z")?,
        },
        ProblemKind::SupportRegularized { phi, d, l, r, z } => Prepared::SupportReg {
            phi: to_prox(phi)?,
            d: to_set(d)?,
            op: to_matrix(l, "payload.L")?,
            r: to_vector(r, "payload.r")?,
            z: to_vector(z, "payload.z")?,
        },
        ProblemKind::Multichannel {
            sets,
            blocks,
            y_list,
        } => Prepared::Block {
            sets: sets.iter().map(to_set).collect::<Result<Vec<_>, _>>()?,
            op: to_block(blocks)?,
            ys: y_list
                .iter()
                .map(|y| to_vector(y, "payload.y_list"))
                .collect::<Result<Vec<_>, _>>()?,
        },
        ProblemKind::CustomFg { f, g, x0 } => Prepared::Composite {
            f: to_prox(f)?,
            g: to_smooth(g)?,
            x0: to_vector(x0, "payload.x0")?,
            set: None,
            mu: None,
        },
    })
}

/// Outcome of a dispatched run.
pub struct RunOutcome {
    pub report: SolveReport,
    /// The point the command prints (primal solution or projection).
    pub primal: Vector,
    /// Named secondary outputs (dual certificates, coupling partners,
    /// per-block solutions).
    pub extras: Vec<(String, Vector)>,
    /// Certified optimal value when a closed form or oracle provides one.
    pub mu: Option<f64>,
    /// Lipschitz bound the schedule was built from, when applicable.
    pub beta: Option<f64>,
}

fn run_spec(settings: &SolverSettings) -> RunSpec {
    RunSpec {
        max_iter: settings.max_iter,
        tol: settings.tol,
        trace_every: settings.trace_every,
        step: settings.step,
    }
}

pub fn dispatch(prepared: &Prepared, settings: &SolverSettings) -> Result<RunOutcome, CliError> {
    let spec = run_spec(settings);
    Ok(match prepared {
        Prepared::Composite { f, g, x0, set, mu } => {
            let beta = g.lipschitz_beta()?;
            let cfg: SolverConfig = spec.config_for_beta(beta)?;
            let report = match settings.algorithm {
                Algorithm::Fista => fista(f, g, x0, &cfg)?,
                Algorithm::Projected => {
                    let set = set.as_ref().ok_or_else(|| {
                        CliError::Config("projected run needs a constraint set".into())
                    })?;
                    projected_gradient(set, g, x0, &cfg)?
                }
                _ => forward_backward(f, g, x0, &cfg)?,
            };
            RunOutcome {
                primal: report.final_point.clone(),
                report,
                extras: vec![],
                mu: *mu,
                beta: Some(beta),
            }
        }
        Prepared::Minkowski { sets, target } => {
            let proj = project_minkowski_sum(sets, target, &spec)?;
            let extras = proj
                .components
                .iter()
                .enumerate()
                .map(|(i, c)| (format!("component{i}"), c.clone()))
                .collect();
            RunOutcome {
                primal: proj.point,
                report: proj.report,
                extras,
                mu: None,
                beta: Some(sets.len() as f64),
            }
        }
        Prepared::Image { op, set, target } => {
            let (point, report) = project_image(op, set, target, &spec)?;
            let n = op.norm()?;
            RunOutcome {
                primal: point,
                report,
                extras: vec![],
                mu: None,
                beta: Some(n * n),
            }
        }
        Prepared::Alternating { f, h, rho, x0 } => {
            let (x, report) = alternating_prox(f, h, *rho, x0, &spec)?;
            RunOutcome {
                primal: x,
                report,
                extras: vec![],
                mu: None,
                beta: Some(1.0 / rho),
            }
        }
        Prepared::Barycentric { hs, rho, x0 } => {
            let (x, report) = barycentric_prox(hs, *rho, x0, &spec)?;
            RunOutcome {
                primal: x,
                report,
                extras: vec![],
                mu: None,
                beta: Some(hs.len() as f64 / rho),
            }
        }
        Prepared::Bivariate { f, ell, z, rho, x0 } => {
            let (x, w, report) = bivariate_coupling(f, ell, z, *rho, x0, &spec)?;
            RunOutcome {
                primal: x,
                report,
                extras: vec![("w".into(), w)],
                mu: None,
                beta: Some(1.0 / rho),
            }
        }
        Prepared::BestApprox { c, d, op, z } => {
            let (x, v, report) = best_approximation(c, d, op, z, &spec)?;
            let n = op.norm()?;
            RunOutcome {
                primal: x,
                report,
                extras: vec![("dual".into(), v)],
                mu: None,
                beta: Some(n * n),
            }
        }
        Prepared::SupportReg { phi, d, op, r, z } => {
            let (x, v, report) = support_regularized(phi, d, op, r, z, &spec)?;
            let n = op.norm()?;
            RunOutcome {
                primal: x,
                report,
                extras: vec![("dual".into(), v)],
                mu: None,
                beta: Some(n * n),
            }
        }
        Prepared::Block { sets, op, ys } => {
            let (xs, report) = multichannel_recovery(sets, op, ys, &spec)?;
            let extras = xs
                .iter()
                .enumerate()
                .map(|(i, x)| (format!("block{i}"), x.clone()))
                .collect();
            RunOutcome {
                primal: report.final_point.clone(),
                report,
                extras,
                mu: None,
                beta: None,
            }
        }
    })
}

/// Named operators of the problem, for the norms command.
pub fn operators(prepared: &Prepared) -> Vec<(String, LinearOperator)> {
    match prepared {
        Prepared::Composite { .. } => vec![],
        Prepared::Minkowski { sets, target } => {
            vec![(
                "sum".into(),
                LinearOperator::sum_operator(sets.len(), target.dim()).expect("validated"),
            )]
        }
        Prepared::Image { op, .. }
        | Prepared::BestApprox { op, .. }
        | Prepared::SupportReg { op, .. } => vec![("L".into(), op.clone())],
        Prepared::Alternating { .. }
        | Prepared::Barycentric { .. }
        | Prepared::Bivariate { .. } => vec![],
        Prepared::Block { op, .. } => {
            let mut out = vec![];
            for k in 0..op.coupling_count() {
                for i in 0..op.variable_count() {
                    if let Some(b) = op.block(k, i) {
                        out.push((format!("L[{k}][{i}]"), b.clone()));
                    }
                }
            }
            out
        }
    }
}
