//! Convergence-rate diagnostics against a certified optimal value.
//!
//! The plain scheme drives `n * (objective gap)` to zero, and the
//! inertial variant keeps `n^2 * (objective gap)` bounded; these
//! sequences make both visible on a recorded trace. The reference value
//! must come from an oracle or a closed form, never from the run itself.

use crate::error::Error;
use crate::solve::SolveReport;

/// Scaled objective-gap sequences computed from a trace.
#[derive(Debug, Clone)]
pub struct RateDiagnostics {
    /// `(n, n * (objective_n - mu))` for every recorded iterate with n >= 1.
    pub n_gap: Vec<(usize, f64)>,
    /// `(n, n^2 * (objective_n - mu))` likewise.
    pub n2_gap: Vec<(usize, f64)>,
    /// Maximum of the first sequence over the final quartile of the trace.
    pub tail_max_n_gap: f64,
    /// Maximum of the second sequence over the final quartile.
    pub tail_max_n2_gap: f64,
}

impl RateDiagnostics {
    fn tail_start(len: usize) -> usize {
        len - (len / 4).max(1).min(len)
    }

    /// Whether `n * gap` is nonincreasing across the final quartile of
    /// recorded iterates, within `slack`.
    pub fn tail_decreasing(&self, slack: f64) -> bool {
        let start = Self::tail_start(self.n_gap.len());
        self.n_gap[start..]
            .windows(2)
            .all(|w| w[1].1 <= w[0].1 + slack)
    }
}

/// Computes the scaled gap sequences for a run against the certified
/// optimal value `mu_ref`. Gaps that round below zero are clamped to
/// exact optimality. `mu_ref` above the best observed objective is
/// rejected: the reference cannot exceed an attained value.
pub fn rate_diagnostics(report: &SolveReport, mu_ref: f64) -> Result<RateDiagnostics, Error> {
    if !mu_ref.is_finite() {
        return Err(Error::Reference(format!("mu_ref {mu_ref} is not finite")));
    }
    let observed_min = report
        .objective_trace
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    if mu_ref > observed_min + 1e-9 * (1.0 + mu_ref.abs()) {
        return Err(Error::Reference(format!(
            "mu_ref {mu_ref} exceeds the best observed objective {observed_min}"
        )));
    }
    let mut n_gap = Vec::new();
    let mut n2_gap = Vec::new();
    for &(n, value) in &report.objective_trace {
        if n == 0 {
            continue;
        }
        let gap = (value - mu_ref).max(0.0);
        n_gap.push((n, n as f64 * gap));
        n2_gap.push((n, (n * n) as f64 * gap));
    }
    if n_gap.is_empty() {
        return Err(Error::Reference(
            "trace has no post-start iterates to diagnose".into(),
        ));
    }
    let start = RateDiagnostics::tail_start(n_gap.len());
    let tail_max = |seq: &[(usize, f64)]| {
        seq[start..]
            .iter()
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    Ok(RateDiagnostics {
        tail_max_n_gap: tail_max(&n_gap),
        tail_max_n2_gap: tail_max(&n2_gap),
        n_gap,
        n2_gap,
    })
}
