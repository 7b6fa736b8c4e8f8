//! Iteration schemes on the `f + g` splitting: the plain scheme, its
//! projected specialization, the inertial variant, the dual scheme for
//! composite proximity problems, and the block scheme for separable
//! multivariate couplings.

mod block;
mod diagnostics;
mod dual;
mod fb;

pub use block::{block_forward_backward, block_lipschitz_beta};
pub use diagnostics::{rate_diagnostics, RateDiagnostics};
pub use dual::dual_forward_backward;
pub use fb::{fista, forward_backward, projected_gradient, InertialState};

use proxkit_core::Vector;

use crate::error::Error;

/// Step-size rule producing the per-iteration step `gamma_n`.
#[derive(Debug, Clone)]
pub enum StepRule {
    /// The same step every iteration.
    Constant(f64),
    /// Repeats the given list.
    Cyclic(Vec<f64>),
    /// Starts at the top of the admissible interval and decays like `1/n`
    /// until capped below at `epsilon`.
    HarmonicCapped,
}

/// A validated step schedule: every produced step lies in
/// `[epsilon, 2/beta - epsilon]` with `0 < epsilon < 1/beta`, which is
/// what the convergence guarantees of the solvers require.
#[derive(Debug, Clone)]
pub struct StepSchedule {
    beta: f64,
    epsilon: f64,
    rule: StepRule,
}

impl StepSchedule {
    pub fn new(beta: f64, epsilon: f64, rule: StepRule) -> Result<Self, Error> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Config(format!("beta {beta} must be positive")));
        }
        if !(epsilon.is_finite() && epsilon > 0.0 && epsilon < 1.0 / beta) {
            return Err(Error::Config(format!(
                "epsilon {epsilon} must lie strictly inside (0, 1/beta) = (0, {})",
                1.0 / beta
            )));
        }
        let lo = epsilon;
        let hi = 2.0 / beta - epsilon;
        let check = |gamma: f64| -> Result<(), Error> {
            if !(gamma.is_finite() && gamma >= lo && gamma <= hi) {
                return Err(Error::Config(format!(
                    "step {gamma} outside the admissible interval [{lo}, {hi}] \
                     (= [epsilon, 2/beta - epsilon] with beta = {beta})"
                )));
            }
            Ok(())
        };
        match &rule {
            StepRule::Constant(gamma) => check(*gamma)?,
            StepRule::Cyclic(list) => {
                if list.is_empty() {
                    return Err(Error::Config("cyclic schedule needs steps".into()));
                }
                for gamma in list {
                    check(*gamma)?;
                }
            }
            StepRule::HarmonicCapped => {}
        }
        Ok(Self {
            beta,
            epsilon,
            rule,
        })
    }

    /// Constant step with the largest safe `epsilon <= 0.1/beta` that the
    /// requested step allows.
    pub fn constant(beta: f64, gamma: f64) -> Result<Self, Error> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Config(format!("beta {beta} must be positive")));
        }
        if !(gamma.is_finite() && gamma > 0.0 && gamma < 2.0 / beta) {
            return Err(Error::Config(format!(
                "step {gamma} outside the admissible open interval (0, 2/beta) = (0, {}) \
                 for beta = {beta}",
                2.0 / beta
            )));
        }
        let slack = gamma.min(2.0 / beta - gamma);
        let epsilon = (0.1 / beta).min(slack);
        Self::new(beta, epsilon, StepRule::Constant(gamma))
    }

    /// The default schedule: constant `gamma = 1/beta`, `epsilon = 0.1/beta`.
    pub fn default_for(beta: f64) -> Result<Self, Error> {
        Self::new(beta, 0.1 / beta, StepRule::Constant(1.0 / beta))
    }

    pub fn cyclic(beta: f64, epsilon: f64, steps: Vec<f64>) -> Result<Self, Error> {
        Self::new(beta, epsilon, StepRule::Cyclic(steps))
    }

    pub fn harmonic_capped(beta: f64, epsilon: f64) -> Result<Self, Error> {
        Self::new(beta, epsilon, StepRule::HarmonicCapped)
    }

    pub fn gamma(&self, n: usize) -> f64 {
        match &self.rule {
            StepRule::Constant(gamma) => *gamma,
            StepRule::Cyclic(list) => list[n % list.len()],
            StepRule::HarmonicCapped => {
                let hi = 2.0 / self.beta - self.epsilon;
                (hi / (n + 1) as f64).max(self.epsilon)
            }
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The admissible step interval `[epsilon, 2/beta - epsilon]`.
    pub fn interval(&self) -> (f64, f64) {
        (self.epsilon, 2.0 / self.beta - self.epsilon)
    }
}

/// Stopping configuration shared by every solver.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub schedule: StepSchedule,
    pub max_iter: usize,
    /// Relative displacement tolerance: stop when
    /// `||x_{n+1} - x_n|| <= tol * (1 + ||x_n||)`.
    pub tol: f64,
    /// Keep every k-th iterate (plus the last) in the report traces.
    pub trace_every: usize,
}

impl SolverConfig {
    pub fn new(
        schedule: StepSchedule,
        max_iter: usize,
        tol: f64,
        trace_every: usize,
    ) -> Result<Self, Error> {
        if max_iter == 0 {
            return Err(Error::Config("max_iter must be >= 1".into()));
        }
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::Config(format!("tol {tol} must be positive")));
        }
        if trace_every == 0 {
            return Err(Error::Config("trace_every must be >= 1".into()));
        }
        Ok(Self {
            schedule,
            max_iter,
            tol,
            trace_every,
        })
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The relative displacement dropped below the tolerance.
    TolReached,
    /// The iteration cap was hit first.
    MaxIter,
}

/// Sampled trace of a run. All per-iterate lists are aligned: entry i
/// describes the recorded iterate `objective_trace[i].0`, with `step`,
/// `displacement`, and `grad_residuals` referring to the transition that
/// produced it (zeros for the starting point).
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub objective_trace: Vec<(usize, f64)>,
    pub step_trace: Vec<f64>,
    pub displacement: Vec<f64>,
    pub grad_residuals: Vec<f64>,
    pub iterates_kept: Vec<(usize, Vector)>,
    pub termination: Termination,
    pub final_point: Vector,
    pub iterations: usize,
}

impl SolveReport {
    /// Whether the recorded objective values never increase by more than
    /// `slack`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.objective_trace
            .windows(2)
            .all(|w| w[1].1 <= w[0].1 + slack)
    }

    pub fn final_objective(&self) -> f64 {
        self.objective_trace
            .last()
            .map(|(_, v)| *v)
            .unwrap_or(f64::NAN)
    }

    pub fn converged(&self) -> bool {
        self.termination == Termination::TolReached
    }
}

/// Accumulates sampled rows during a run.
pub(crate) struct Recorder {
    every: usize,
    objective_trace: Vec<(usize, f64)>,
    step_trace: Vec<f64>,
    displacement: Vec<f64>,
    grad_residuals: Vec<f64>,
    iterates_kept: Vec<(usize, Vector)>,
    pending: Option<(usize, f64, f64, f64, f64, Vector)>,
}

impl Recorder {
    pub(crate) fn new(every: usize, x0: &Vector, objective0: f64) -> Self {
        let mut r = Self {
            every,
            objective_trace: Vec::new(),
            step_trace: Vec::new(),
            displacement: Vec::new(),
            grad_residuals: Vec::new(),
            iterates_kept: Vec::new(),
            pending: None,
        };
        r.push(0, objective0, 0.0, 0.0, 0.0, x0.clone());
        r
    }

    fn push(&mut self, n: usize, obj: f64, step: f64, disp: f64, gres: f64, x: Vector) {
        self.objective_trace.push((n, obj));
        self.step_trace.push(step);
        self.displacement.push(disp);
        self.grad_residuals.push(gres);
        self.iterates_kept.push((n, x));
    }

    pub(crate) fn record(
        &mut self,
        n: usize,
        obj: f64,
        step: f64,
        disp: f64,
        gres: f64,
        x: &Vector,
    ) {
        if n.is_multiple_of(self.every) {
            self.push(n, obj, step, disp, gres, x.clone());
            self.pending = None;
        } else {
            self.pending = Some((n, obj, step, disp, gres, x.clone()));
        }
    }

    pub(crate) fn finish(mut self, termination: Termination) -> SolveReport {
        if let Some((n, obj, step, disp, gres, x)) = self.pending.take() {
            self.push(n, obj, step, disp, gres, x);
        }
        let (iterations, final_point) = {
            let (n, x) = self.iterates_kept.last().expect("at least the start");
            (*n, x.clone())
        };
        SolveReport {
            objective_trace: self.objective_trace,
            step_trace: self.step_trace,
            displacement: self.displacement,
            grad_residuals: self.grad_residuals,
            iterates_kept: self.iterates_kept,
            termination,
            final_point,
            iterations,
        }
    }
}
