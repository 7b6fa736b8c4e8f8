//! The three commands behind the binary: `run` (solve + trace), `check`
//! (brute-force verification report), and `norms` (operator norm and
//! Lipschitz-bound estimates).

use std::fs;
use std::path::Path;

use proxkit::prox::{ConvexSet, ProxFunction};
use proxkit::smooth::SmoothFunction;
use proxkit::solve::Termination;
use proxkit_core::{LinearOperator, Vector};
use proxkit_oracle::{grid_minimize, verify_prox_inequality, SampleSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::build::{dispatch, prepare, to_matrix, Prepared, RunOutcome};
use crate::error::CliError;
use crate::schema::{
    parse_problem, MatrixData, ProblemFile, ProblemKind, SmoothData, SolverSettings,
};

/// Formats a float with 12 significant digits.
pub fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

fn format_point(x: &Vector) -> String {
    let parts: Vec<String> = x.iter().map(|v| sig12(*v)).collect();
    format!("[{}]", parts.join(", "))
}

/// Sampling seed: `PROXKIT_SEED` when set, the oracle default otherwise.
pub fn seed_from_env() -> u64 {
    std::env::var("PROXKIT_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(proxkit_oracle::DEFAULT_SEED)
}

/// Command-line overrides applied on top of the file's solver section.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    /// `Some(None)` selects auto, `Some(Some(g))` a constant step.
    pub step: Option<Option<f64>>,
}

fn apply_overrides(mut settings: SolverSettings, o: &Overrides) -> SolverSettings {
    if let Some(m) = o.max_iter {
        settings.max_iter = m;
    }
    if let Some(t) = o.tol {
        settings.tol = t;
    }
    if let Some(step) = &o.step {
        settings.step = *step;
    }
    settings
}

fn write_trace(
    path: &Path,
    file: &ProblemFile,
    settings: &SolverSettings,
    outcome: &RunOutcome,
) -> Result<(), CliError> {
    let mut text = String::new();
    text.push_str(&format!(
        "# proxkit trace kind={} algorithm={}\n",
        file.problem.kind_name(),
        settings.algorithm.name()
    ));
    let step_echo = match settings.step {
        Some(g) => format!("{g}"),
        None => "auto".into(),
    };
    text.push_str(&format!(
        "# max_iter={} tol={} trace_every={} step={} beta={} mu={}\n",
        settings.max_iter,
        settings.tol,
        settings.trace_every,
        step_echo,
        outcome
            .beta
            .map(|b| b.to_string())
            .unwrap_or_else(|| "n/a".into()),
        outcome
            .mu
            .map(|m| m.to_string())
            .unwrap_or_else(|| "unknown".into()),
    ));
    text.push_str("n,objective,gap_if_mu_known,step,displacement,grad_residual\n");
    let r = &outcome.report;
    for (i, (n, obj)) in r.objective_trace.iter().enumerate() {
        let gap = match outcome.mu {
            Some(mu) => format!("{}", obj - mu),
            None => String::new(),
        };
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            n, obj, gap, r.step_trace[i], r.displacement[i], r.grad_residuals[i]
        ));
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Runs a problem file; returns the process exit code (0 converged,
/// 2 iteration-capped). Configuration problems surface as `CliError` and
/// map to exit 3; parse and I/O problems map to exit 1.
pub fn run(
    path: &Path,
    overrides: &Overrides,
    trace: Option<&Path>,
) -> Result<i32, CliError> {
    let file = parse_problem(path)?;
    let settings = apply_overrides(file.settings()?, overrides);
    let prepared = prepare(&file)?;
    let outcome = dispatch(&prepared, &settings)?;

    println!(
        "kind={} algorithm={}",
        file.problem.kind_name(),
        settings.algorithm.name()
    );
    if let Some(beta) = outcome.beta {
        println!("beta={}", sig12(beta));
    }
    println!(
        "termination: {} after {} iterations",
        match outcome.report.termination {
            Termination::TolReached => "tol_reached",
            Termination::MaxIter => "max_iter",
        },
        outcome.report.iterations
    );
    println!("objective: {}", sig12(outcome.report.final_objective()));
    if let Some(mu) = outcome.mu {
        println!(
            "gap vs oracle optimum: {}",
            sig12(outcome.report.final_objective() - mu)
        );
    }
    println!("final point: {}", format_point(&outcome.primal));
    for (name, x) in &outcome.extras {
        println!("{name}: {}", format_point(x));
    }
    if let Some(trace_path) = trace {
        write_trace(trace_path, &file, &settings, &outcome)?;
        println!("trace written to {}", trace_path.display());
    }
    Ok(match outcome.report.termination {
        Termination::TolReached => 0,
        Termination::MaxIter => 2,
    })
}

struct CheckRow {
    name: String,
    pass: bool,
    detail: String,
}

fn prox_check_row(
    name: &str,
    f: &ProxFunction,
    rng: &mut ChaCha8Rng,
    seed: u64,
    corrupt: bool,
) -> CheckRow {
    let dim = f.dim();
    let x = Vector::new((0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .expect("finite sample");
    let gamma = 1.0;
    let truth = match f.prox(gamma, &x) {
        Ok(p) => p,
        Err(e) => {
            return CheckRow {
                name: name.into(),
                pass: false,
                detail: format!("prox failed: {e}"),
            }
        }
    };
    let claimed = if corrupt {
        let mut data = truth.as_slice().to_vec();
        data[0] += 0.1;
        Vector::new(data).expect("finite")
    } else {
        truth.clone()
    };
    let value = |y: &Vector| f.value(y).map(|v| v.to_f64()).unwrap_or(f64::INFINITY);
    let sampler = |r: &mut dyn rand::RngCore| f.sample_domain(r).expect("domain sample");
    let spec = SampleSpec::Generator(&sampler);
    let extra = if corrupt {
        vec![truth.clone()]
    } else {
        vec![]
    };
    match verify_prox_inequality(&value, gamma, &x, &claimed, &spec, 100, &extra, seed) {
        Ok(check) => CheckRow {
            name: name.into(),
            pass: check.pass,
            detail: format!(
                "worst margin {:.3e} over {} competitors (seed {})",
                check.worst_margin, check.accepted, check.seed
            ),
        },
        Err(e) => CheckRow {
            name: name.into(),
            pass: false,
            detail: format!("sampling failed: {e}"),
        },
    }
}

fn projection_check_row(
    name: &str,
    set: &ConvexSet,
    rng: &mut ChaCha8Rng,
    seed: u64,
) -> CheckRow {
    let dim = set.dim();
    let x = Vector::new((0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect())
        .expect("finite sample");
    let p = match set.project(&x) {
        Ok(p) => p,
        Err(e) => {
            return CheckRow {
                name: name.into(),
                pass: false,
                detail: format!("projection failed: {e}"),
            }
        }
    };
    let value = |y: &Vector| {
        if set.contains(y).unwrap_or(false) {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let sampler = |r: &mut dyn rand::RngCore| set.sample(r).expect("set sample");
    let spec = SampleSpec::Generator(&sampler);
    match verify_prox_inequality(&value, 1.0, &x, &p, &spec, 100, &[], seed) {
        Ok(check) => CheckRow {
            name: name.into(),
            pass: check.pass,
            detail: format!("worst margin {:.3e}", check.worst_margin),
        },
        Err(e) => CheckRow {
            name: name.into(),
            pass: false,
            detail: format!("sampling failed: {e}"),
        },
    }
}

fn gradient_check_row(name: &str, g: &SmoothFunction, rng: &mut ChaCha8Rng) -> CheckRow {
    let value = |x: &Vector| g.value(x).expect("smooth value");
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let x = Vector::new((0..g.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .expect("finite");
        let grad = match g.grad(&x) {
            Ok(v) => v,
            Err(e) => {
                return CheckRow {
                    name: name.into(),
                    pass: false,
                    detail: format!("gradient failed: {e}"),
                }
            }
        };
        let fd = proxkit_oracle::finite_diff_grad(&value, &x, 1e-6 * (1.0 + x.norm()));
        let rel = grad.sub(&fd).norm() / (1.0 + grad.norm());
        worst = worst.max(rel);
    }
    CheckRow {
        name: name.into(),
        pass: worst <= 1e-5,
        detail: format!("worst relative error {worst:.3e} over 5 points"),
    }
}

type NamedProxes = Vec<(String, ProxFunction)>;
type NamedSets = Vec<(String, ConvexSet)>;

/// Targets collected from a prepared problem for the check command.
fn check_targets(prepared: &Prepared) -> (NamedProxes, NamedSets, Option<SmoothFunction>) {
    match prepared {
        Prepared::Composite { f, g, set, .. } => {
            let mut proxes = vec![("f".to_string(), f.clone())];
            let mut sets = vec![];
            if let Some(c) = set {
                sets.push(("set".to_string(), c.clone()));
                proxes.clear(); // the indicator is checked through its set
            }
            (proxes, sets, Some(g.clone()))
        }
        Prepared::Minkowski { sets, .. } => (
            vec![],
            sets.iter()
                .enumerate()
                .map(|(i, s)| (format!("set{i}"), s.clone()))
                .collect(),
            None,
        ),
        Prepared::Image { set, .. } => (vec![], vec![("set".into(), set.clone())], None),
        Prepared::Alternating { f, h, .. } => (
            vec![("f".into(), f.clone()), ("h".into(), h.clone())],
            vec![],
            None,
        ),
        Prepared::Barycentric { hs, .. } => (
            hs.iter()
                .enumerate()
                .map(|(i, h)| (format!("h{i}"), h.clone()))
                .collect(),
            vec![],
            None,
        ),
        Prepared::Bivariate { f, ell, .. } => (
            vec![("f".into(), f.clone()), ("ell".into(), ell.clone())],
            vec![],
            None,
        ),
        Prepared::BestApprox { c, d, .. } => (
            vec![],
            vec![("c".into(), c.clone()), ("d".into(), d.clone())],
            None,
        ),
        Prepared::SupportReg { phi, d, .. } => (
            vec![("phi".into(), phi.clone())],
            vec![("d".into(), d.clone())],
            None,
        ),
        Prepared::Block { sets, .. } => (
            vec![],
            sets.iter()
                .enumerate()
                .map(|(i, s)| (format!("set{i}"), s.clone()))
                .collect(),
            None,
        ),
    }
}

/// Verification report: prox/projection characterizations, a
/// finite-difference gradient audit, a short monotonicity run, and a
/// grid cross-check at low dimension. Exit 0 when everything passes.
pub fn check(path: &Path, inject_prox_fault: bool) -> Result<i32, CliError> {
    let file = parse_problem(path)?;
    let settings = file.settings()?;
    let prepared = prepare(&file)?;
    let seed = seed_from_env();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<CheckRow> = Vec::new();

    let (proxes, sets, smooth) = check_targets(&prepared);
    for (name, f) in &proxes {
        rows.push(prox_check_row(
            &format!("prox characterization [{name}]"),
            f,
            &mut rng,
            seed,
            inject_prox_fault,
        ));
    }
    for (name, s) in &sets {
        rows.push(projection_check_row(
            &format!("projection characterization [{name}]"),
            s,
            &mut rng,
            seed,
        ));
    }
    if let Some(g) = &smooth {
        if !g.is_zero_kind() {
            rows.push(gradient_check_row("gradient vs finite differences", g, &mut rng));
        }
    }

    // short run: the recorded objective must not increase for the
    // monotone schemes (every algorithm here except the inertial one)
    let mut short = settings.clone();
    short.max_iter = settings.max_iter.min(50);
    match dispatch(&prepared, &short) {
        Ok(outcome) => {
            if settings.algorithm == crate::schema::Algorithm::Fista {
                rows.push(CheckRow {
                    name: "objective monotonicity".into(),
                    pass: true,
                    detail: "skipped: not guaranteed for the inertial scheme".into(),
                });
            } else {
                let ok = outcome.report.is_monotone(1e-10);
                rows.push(CheckRow {
                    name: "objective monotonicity".into(),
                    pass: ok,
                    detail: format!(
                        "{} recorded values over {} iterations",
                        outcome.report.objective_trace.len(),
                        outcome.report.iterations
                    ),
                });
            }
            // grid cross-check for small composite problems
            if let Prepared::Composite { f, g, .. } = &prepared {
                let dim = outcome.primal.dim();
                if dim <= 3 {
                    let center = &outcome.primal;
                    let lo: Vec<f64> = center.iter().map(|v| v - 2.0).collect();
                    let hi: Vec<f64> = center.iter().map(|v| v + 2.0).collect();
                    let objective = |x: &Vector| {
                        f.value(x).map(|v| v.to_f64()).unwrap_or(f64::INFINITY)
                            + g.value(x).unwrap_or(f64::INFINITY)
                    };
                    match grid_minimize(&objective, &lo, &hi, 201) {
                        Ok((_, grid_value)) => {
                            let final_obj = outcome.report.final_objective();
                            let pass = final_obj <= grid_value + 1e-6;
                            rows.push(CheckRow {
                                name: "grid cross-check".into(),
                                pass,
                                detail: format!(
                                    "solver {} vs grid {}",
                                    sig12(final_obj),
                                    sig12(grid_value)
                                ),
                            });
                        }
                        Err(e) => rows.push(CheckRow {
                            name: "grid cross-check".into(),
                            pass: true,
                            detail: format!("skipped: {e}"),
                        }),
                    }
                }
            }
        }
        Err(e) => rows.push(CheckRow {
            name: "short run".into(),
            pass: false,
            detail: format!("{e}"),
        }),
    }

    let mut all_pass = true;
    println!("check report for {} (seed {seed})", path.display());
    for row in &rows {
        let verdict = if row.pass { "PASS" } else { "FAIL" };
        println!("  {verdict}  {} - {}", row.name, row.detail);
        all_pass &= row.pass;
    }
    Ok(if all_pass { 0 } else { 1 })
}

fn payload_matrices(problem: &ProblemKind) -> Vec<(String, MatrixData)> {
    match problem {
        ProblemKind::Lasso { l, .. }
        | ProblemKind::ElasticNet { l, .. }
        | ProblemKind::ConstrainedLs { l, .. }
        | ProblemKind::ImageProjection { l, .. }
        | ProblemKind::BestApproximation { l, .. }
        | ProblemKind::SupportRegularized { l, .. } => vec![("L".into(), l.clone())],
        ProblemKind::Envelope { terms, .. } => terms
            .iter()
            .enumerate()
            .map(|(i, t)| (format!("terms[{i}].L"), t.l.clone()))
            .collect(),
        ProblemKind::Multichannel { blocks, .. } => blocks
            .blocks
            .iter()
            .map(|b| (format!("L[{}][{}]", b.k, b.i), b.l.clone()))
            .collect(),
        ProblemKind::CustomFg { g, .. } => match g {
            SmoothData::LeastSquares { l, .. } => vec![("g.L".into(), l.clone())],
            SmoothData::MultiQuadratic { terms } => terms
                .iter()
                .enumerate()
                .map(|(i, t)| (format!("g.terms[{i}].L"), t.l.clone()))
                .collect(),
            SmoothData::EnvelopeSum { terms } => terms
                .iter()
                .enumerate()
                .map(|(i, t)| (format!("g.terms[{i}].L"), t.l.clone()))
                .collect(),
            SmoothData::Zero { .. } => vec![],
        },
        _ => vec![],
    }
}

/// Model Lipschitz bound without running anything.
fn model_beta(prepared: &Prepared) -> Result<Option<f64>, CliError> {
    Ok(match prepared {
        Prepared::Composite { g, .. } => Some(g.lipschitz_beta()?),
        Prepared::Minkowski { sets, .. } => Some(sets.len() as f64),
        Prepared::Image { op, .. }
        | Prepared::BestApprox { op, .. }
        | Prepared::SupportReg { op, .. } => {
            let n = op.norm()?;
            Some(n * n)
        }
        Prepared::Alternating { rho, .. } => Some(1.0 / rho),
        Prepared::Barycentric { hs, rho, .. } => Some(hs.len() as f64 / rho),
        Prepared::Bivariate { rho, .. } => Some(1.0 / rho),
        Prepared::Block { op, ys, .. } => {
            let mut beta = 0.0;
            for k in 0..op.coupling_count() {
                for i in 0..op.variable_count() {
                    if let Some(b) = op.block(k, i) {
                        if !b.is_zero() {
                            let n = b.norm()?;
                            beta += n * n;
                        }
                    }
                }
            }
            let _ = ys;
            Some(beta)
        }
    })
}

/// Prints estimated operator norms and the model's Lipschitz bound.
pub fn norms(path: &Path) -> Result<i32, CliError> {
    let file = parse_problem(path)?;
    let prepared = prepare(&file)?;
    println!("kind={}", file.problem.kind_name());
    for (name, m) in payload_matrices(&file.problem) {
        let op: LinearOperator = to_matrix(&m, &name)?;
        if op.is_zero() {
            println!("||{name}|| = 0 (zero operator)");
        } else {
            println!("||{name}|| = {}", sig12(op.norm()?));
        }
    }
    if let Some(beta) = model_beta(&prepared)? {
        println!("beta = {}", sig12(beta));
    }
    Ok(0)
}
