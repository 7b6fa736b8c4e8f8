//! Slow, independent verifiers for the fast paths elsewhere in the
//! workspace.
//!
//! Nothing in this crate calls the prox/solver code it is used to check:
//! objectives and samplers come in as plain closures, so the only shared
//! dependency is the vector type. Tests and the `check` CLI command wire
//! the two sides together.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use proxkit_core::Vector;

/// Default seed for oracle sampling; override via the caller (the CLI maps
/// `PROXKIT_SEED` onto it).
pub const DEFAULT_SEED: u64 = 0x0b5e55ed;

/// Slack allowed when checking the prox/projection variational inequality.
pub const PROX_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Error)]
pub enum OracleError {
    /// Request outside what the brute-force machinery supports.
    #[error("oracle capability exceeded: {0}")]
    Capability(String),
    /// Could not draw enough feasible sample points.
    #[error("sampling failed: {0}")]
    Sampling(String),
    /// Malformed input (bounds, dimensions).
    #[error("invalid oracle input: {0}")]
    Input(String),
}

/// How `verify_prox_inequality` draws feasible competitors.
pub enum SampleSpec<'a> {
    /// Uniform draws from the box, accepted when the objective is finite
    /// there. Suits full-dimensional domains.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Caller-supplied generator for structured or measure-zero domains.
    Generator(&'a dyn Fn(&mut dyn RngCore) -> Vector),
}

/// Result of a variational-inequality check.
#[derive(Debug, Clone)]
pub struct ProxCheck {
    pub pass: bool,
    /// Largest observed violation of the inequality (negative when it holds
    /// strictly everywhere).
    pub worst_margin: f64,
    /// Number of feasible competitors actually tested.
    pub accepted: usize,
    /// Seed used for sampling, recorded for reproducibility.
    pub seed: u64,
}

fn finite_vector(data: Vec<f64>) -> Vector {
    Vector::new(data).expect("oracle produced a non-finite point")
}

/// Exhaustive grid search over a box, followed by one refinement pass at
/// ten times the resolution around the incumbent. Ties break toward the
/// lowest lexicographic grid index. Intended for dimensions up to 3.
pub fn grid_minimize(
    objective: &dyn Fn(&Vector) -> f64,
    lo: &[f64],
    hi: &[f64],
    resolution: usize,
) -> Result<(Vector, f64), OracleError> {
    let dim = lo.len();
    if dim == 0 || dim != hi.len() {
        return Err(OracleError::Input(
            "bounds must be nonempty and match".into(),
        ));
    }
    if dim > 3 {
        return Err(OracleError::Capability(format!(
            "grid search supports dimension <= 3, got {dim}"
        )));
    }
    if !(2..=2001).contains(&resolution) {
        return Err(OracleError::Input(format!(
            "resolution must be in 2..=2001, got {resolution}"
        )));
    }
    if lo.iter().zip(hi).any(|(a, b)| a >= b) {
        return Err(OracleError::Input("need lo < hi on every axis".into()));
    }

    let (best, value) = scan_box(objective, lo, hi, resolution);

    // Refinement: one cell around the incumbent at 10x the resolution.
    let mut rlo = vec![0.0; dim];
    let mut rhi = vec![0.0; dim];
    for i in 0..dim {
        let spacing = (hi[i] - lo[i]) / (resolution - 1) as f64;
        rlo[i] = (best[i] - spacing).max(lo[i]);
        rhi[i] = (best[i] + spacing).min(hi[i]);
    }
    let (rbest, rvalue) = scan_box(objective, &rlo, &rhi, 21);
    if rvalue < value {
        Ok((rbest, rvalue))
    } else {
        Ok((best, value))
    }
}

fn scan_box(
    objective: &dyn Fn(&Vector) -> f64,
    lo: &[f64],
    hi: &[f64],
    resolution: usize,
) -> (Vector, f64) {
    let dim = lo.len();
    let mut idx = vec![0usize; dim];
    let mut best_value = f64::INFINITY;
    let mut best = Vector::zeros(dim);
    let mut point = vec![0.0; dim];
    loop {
        for i in 0..dim {
            point[i] = lo[i] + (hi[i] - lo[i]) * idx[i] as f64 / (resolution - 1) as f64;
        }
        let x = finite_vector(point.clone());
        let v = objective(&x);
        if v < best_value {
            best_value = v;
            best = x;
        }
        // odometer increment, last axis fastest
        let mut axis = dim;
        loop {
            if axis == 0 {
                return (best, best_value);
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < resolution {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// Closed-form solution of the separable problem
/// `min_x sum_k |x_k| + (a_k x_k - b_k)^2 / 2` by subgradient case
/// analysis: `x_k = soft_1(a_k b_k) / a_k^2`.
pub fn subgradient_solve_separable_l1(a: &[f64], b: &[f64]) -> Result<Vector, OracleError> {
    if a.is_empty() || a.len() != b.len() {
        return Err(OracleError::Input(
            "a and b must be nonempty and match".into(),
        ));
    }
    if let Some(i) = a.iter().position(|v| *v <= 0.0) {
        return Err(OracleError::Capability(format!(
            "coefficient a[{i}] = {} must be strictly positive",
            a[i]
        )));
    }
    let data: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(ak, bk)| {
            let t = ak * bk;
            t.signum() * (t.abs() - 1.0).max(0.0) / (ak * ak)
        })
        .collect();
    Ok(finite_vector(data))
}

/// Central-difference gradient of a scalar function.
pub fn finite_diff_grad(value: &dyn Fn(&Vector) -> f64, x: &Vector, h: f64) -> Vector {
    assert!(h > 0.0, "step must be positive");
    let mut out = vec![0.0; x.dim()];
    let mut fwd = x.as_slice().to_vec();
    let mut bwd = x.as_slice().to_vec();
    for i in 0..x.dim() {
        let xi = x[i];
        fwd[i] = xi + h;
        bwd[i] = xi - h;
        let fp = value(&finite_vector(fwd.clone()));
        let fm = value(&finite_vector(bwd.clone()));
        out[i] = (fp - fm) / (2.0 * h);
        fwd[i] = xi;
        bwd[i] = xi;
    }
    finite_vector(out)
}

/// Checks the variational inequality that characterizes a prox point:
/// for every feasible competitor y,
/// `<y - p, x - p> / gamma + f(p) <= f(y) + PROX_CHECK_TOL`.
///
/// With f an indicator this reduces to the projection characterization
/// `<y - p, x - p> <= 0`. Draws competitors per `spec` (10x oversampling,
/// at least 50 accepted for box rejection) and reports the worst margin.
/// `extra` candidates are always evaluated on top of the random draws;
/// violations of a corrupted prox are often localized, so callers probing
/// for faults pass a known-good point (e.g. a closed-form prox) there.
#[allow(clippy::too_many_arguments)]
pub fn verify_prox_inequality(
    value: &dyn Fn(&Vector) -> f64,
    gamma: f64,
    x: &Vector,
    p: &Vector,
    spec: &SampleSpec<'_>,
    samples: usize,
    extra: &[Vector],
    seed: u64,
) -> Result<ProxCheck, OracleError> {
    if gamma <= 0.0 {
        return Err(OracleError::Input("gamma must be positive".into()));
    }
    if samples == 0 {
        return Err(OracleError::Input("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fp = value(p);
    let mut worst = f64::NEG_INFINITY;
    let mut accepted = 0usize;

    let consider = |y: Vector, worst: &mut f64, accepted: &mut usize| {
        let fy = value(&y);
        if !fy.is_finite() {
            return false;
        }
        let margin = if fp.is_finite() {
            y.sub(p).dot(&x.sub(p)) / gamma + fp - fy
        } else {
            // claimed prox point outside the domain always violates
            f64::INFINITY
        };
        if margin > *worst {
            *worst = margin;
        }
        *accepted += 1;
        true
    };

    let mut extra_used = 0usize;
    for y in extra {
        if y.dim() != x.dim() {
            return Err(OracleError::Input(
                "extra candidate dimension mismatch".into(),
            ));
        }
        if consider(y.clone(), &mut worst, &mut extra_used) {
            // counted separately from the random draws below
        }
    }

    match spec {
        SampleSpec::Box { lo, hi } => {
            if lo.len() != x.dim() || hi.len() != x.dim() {
                return Err(OracleError::Input("sample box dimension mismatch".into()));
            }
            let budget = samples.saturating_mul(10);
            let mut draws = 0usize;
            while accepted < samples && draws < budget {
                draws += 1;
                let data: Vec<f64> = lo
                    .iter()
                    .zip(hi)
                    .map(|(a, b)| if a == b { *a } else { rng.gen_range(*a..=*b) })
                    .collect();
                consider(finite_vector(data), &mut worst, &mut accepted);
            }
            let minimum = samples.min(50);
            if accepted < minimum {
                return Err(OracleError::Sampling(format!(
                    "only {accepted} feasible samples out of {draws} draws (need {minimum})"
                )));
            }
        }
        SampleSpec::Generator(make) => {
            for _ in 0..samples {
                let y = make(&mut rng);
                if y.dim() != x.dim() {
                    return Err(OracleError::Input(
                        "generator produced wrong dimension".into(),
                    ));
                }
                if !consider(y, &mut worst, &mut accepted) {
                    return Err(OracleError::Sampling(
                        "generator produced an infeasible point".into(),
                    ));
                }
            }
        }
    }

    Ok(ProxCheck {
        pass: worst <= PROX_CHECK_TOL,
        worst_margin: worst,
        accepted: accepted + extra_used,
        seed,
    })
}
