use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;
use crate::vector::Vector;

/// Default relative tolerance for power iteration.
pub const DEFAULT_NORM_TOL: f64 = 1e-9;
/// Default iteration cap for power iteration.
pub const DEFAULT_NORM_MAX_ITER: usize = 10_000;

/// Seed for the deterministic perturbation used to escape an unlucky start.
const PERTURB_SEED: u64 = 0x70_72_6f_78;

/// Outcome of a spectral-norm estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    /// Estimated largest singular value.
    pub value: f64,
    /// Whether the iteration met its tolerance. When false the value has
    /// been inflated by 1% so it still upper-bounds step-size computations.
    pub converged: bool,
    /// `true` when the value is analytically exact (identity, diagonal, sum).
    pub exact: bool,
}

/// A dense real matrix acting between finite-dimensional spaces.
///
/// `apply` maps `cols -> rows`; `adjoint_apply` is the transpose action.
/// The spectral norm is cached on first estimation; the cache write is
/// guarded by a `OnceLock` so concurrent estimates agree.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    norm_cache: OnceLock<NormEstimate>,
}

impl PartialEq for LinearOperator {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.entries == other.entries
    }
}

impl LinearOperator {
    /// Builds an operator from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self, CoreError> {
        if rows == 0 || cols == 0 {
            return Err(CoreError::InvalidShape(format!(
                "operator must have positive dimensions, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(CoreError::InvalidShape(format!(
                "{rows}x{cols} operator needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite(format!(
                "operator entry {i} is {}",
                entries[i]
            )));
        }
        let op = Self {
            rows,
            cols,
            entries,
            norm_cache: OnceLock::new(),
        };
        // a diagonal matrix has an analytically exact norm; catching it here
        // keeps step sizes exact for data that arrives as dense entries
        if rows == cols {
            let diagonal_only = (0..rows).all(|r| {
                (0..cols).all(|c| r == c || op.entries[r * cols + c] == 0.0)
            });
            if diagonal_only {
                let value = (0..rows).fold(0.0f64, |m, i| m.max(op.entries[i * cols + i].abs()));
                let _ = op.norm_cache.set(NormEstimate {
                    value,
                    converged: true,
                    exact: true,
                });
            }
        }
        Ok(op)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, CoreError> {
        if rows.is_empty() {
            return Err(CoreError::InvalidShape("operator needs rows".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(CoreError::InvalidShape("ragged row data".into()));
        }
        let entries: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(rows.len(), cols, entries)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        let op = Self::new(n, n, entries).expect("identity is well formed");
        let _ = op.norm_cache.set(NormEstimate {
            value: 1.0,
            converged: true,
            exact: true,
        });
        op
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self, CoreError> {
        let n = diag.len();
        let mut entries = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            entries[i * n + i] = *d;
        }
        let op = Self::new(n, n, entries)?;
        let _ = op.norm_cache.set(NormEstimate {
            value: diag.iter().fold(0.0, |m, d| m.max(d.abs())),
            converged: true,
            exact: true,
        });
        Ok(op)
    }

    /// The summation operator `(x_1, ..., x_m) -> x_1 + ... + x_m` on the
    /// m-fold product of a `space_dim`-dimensional space. Its adjoint is
    /// `x -> (x, ..., x)` and its norm is exactly `sqrt(m)`.
    pub fn sum_operator(m: usize, space_dim: usize) -> Result<Self, CoreError> {
        if m == 0 || space_dim == 0 {
            return Err(CoreError::InvalidShape(
                "sum_operator requires m >= 1 and space_dim >= 1".into(),
            ));
        }
        let rows = space_dim;
        let cols = m * space_dim;
        let mut entries = vec![0.0; rows * cols];
        for block in 0..m {
            for i in 0..space_dim {
                entries[i * cols + block * space_dim + i] = 1.0;
            }
        }
        let op = Self::new(rows, cols, entries)?;
        let _ = op.norm_cache.set(NormEstimate {
            value: (m as f64).sqrt(),
            converged: true,
            exact: true,
        });
        Ok(op)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| *v == 0.0)
    }

    /// Matrix-vector product `L x`.
    pub fn apply(&self, x: &Vector) -> Result<Vector, CoreError> {
        if x.dim() != self.cols {
            return Err(CoreError::dim("apply", self.cols, x.dim()));
        }
        let xs = x.as_slice();
        let mut out = vec![0.0; self.rows];
        for (r, slot) in out.iter_mut().enumerate() {
            let row = &self.entries[r * self.cols..(r + 1) * self.cols];
            *slot = row.iter().zip(xs).map(|(a, b)| a * b).sum();
        }
        Ok(Vector::from_raw(out))
    }

    /// Adjoint product `L* u` (transpose in the dense real case).
    pub fn adjoint_apply(&self, u: &Vector) -> Result<Vector, CoreError> {
        if u.dim() != self.rows {
            return Err(CoreError::dim("adjoint_apply", self.rows, u.dim()));
        }
        let us = u.as_slice();
        let mut out = vec![0.0; self.cols];
        for (r, uv) in us.iter().enumerate() {
            let row = &self.entries[r * self.cols..(r + 1) * self.cols];
            for (c, a) in row.iter().enumerate() {
                out[c] += a * uv;
            }
        }
        Ok(Vector::from_raw(out))
    }

    pub fn transpose(&self) -> LinearOperator {
        let mut entries = vec![0.0; self.rows * self.cols];
        for r in 0..self.rows {
            for c in 0..self.cols {
                entries[c * self.rows + r] = self.entries[r * self.cols + c];
            }
        }
        LinearOperator {
            rows: self.cols,
            cols: self.rows,
            entries,
            norm_cache: OnceLock::new(),
        }
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &LinearOperator) -> Result<LinearOperator, CoreError> {
        if self.cols != other.rows {
            return Err(CoreError::dim("compose", self.cols, other.rows));
        }
        let mut entries = vec![0.0; self.rows * other.cols];
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.entries[r * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    entries[r * other.cols + c] += a * other.entries[k * other.cols + c];
                }
            }
        }
        LinearOperator::new(self.rows, other.cols, entries)
    }

    /// Side-by-side stacking `[A B ...]`; all parts must share the row count.
    pub fn hstack(parts: &[LinearOperator]) -> Result<LinearOperator, CoreError> {
        if parts.is_empty() {
            return Err(CoreError::InvalidShape("hstack of nothing".into()));
        }
        let rows = parts[0].rows;
        if parts.iter().any(|p| p.rows != rows) {
            return Err(CoreError::InvalidShape("hstack: row counts differ".into()));
        }
        let cols: usize = parts.iter().map(|p| p.cols).sum();
        let mut entries = vec![0.0; rows * cols];
        let mut offset = 0;
        for p in parts {
            for r in 0..rows {
                for c in 0..p.cols {
                    entries[r * cols + offset + c] = p.entries[r * p.cols + c];
                }
            }
            offset += p.cols;
        }
        LinearOperator::new(rows, cols, entries)
    }

    /// Vertical stacking; all parts must share the column count.
    pub fn vstack(parts: &[LinearOperator]) -> Result<LinearOperator, CoreError> {
        if parts.is_empty() {
            return Err(CoreError::InvalidShape("vstack of nothing".into()));
        }
        let cols = parts[0].cols;
        if parts.iter().any(|p| p.cols != cols) {
            return Err(CoreError::InvalidShape("vstack: col counts differ".into()));
        }
        let entries: Vec<f64> = parts.iter().flat_map(|p| p.entries.clone()).collect();
        let rows: usize = parts.iter().map(|p| p.rows).sum();
        LinearOperator::new(rows, cols, entries)
    }

    /// Largest singular value via power iteration on `L* L`, within a
    /// relative error of `10 * tol` of the true norm. The start vector is
    /// the normalized all-ones vector; once the Rayleigh quotient settles,
    /// a deterministic perturbation pass guards against a start that is
    /// orthogonal to the top eigenspace. The result is cached.
    pub fn operator_norm(&self, tol: f64, max_iter: usize) -> Result<NormEstimate, CoreError> {
        if self.is_zero() {
            return Err(CoreError::ZeroOperator);
        }
        if tol <= 0.0 {
            return Err(CoreError::InvalidShape("tol must be positive".into()));
        }
        if let Some(cached) = self.norm_cache.get() {
            return Ok(*cached);
        }
        let estimate = self.power_iteration(tol, max_iter);
        Ok(*self.norm_cache.get_or_init(|| estimate))
    }

    /// `operator_norm` with the default tolerance and iteration cap.
    pub fn norm(&self) -> Result<f64, CoreError> {
        Ok(self
            .operator_norm(DEFAULT_NORM_TOL, DEFAULT_NORM_MAX_ITER)?
            .value)
    }

    /// Exposes the cached estimate, if any, without computing one.
    pub fn cached_norm(&self) -> Option<NormEstimate> {
        self.norm_cache.get().copied()
    }

    fn power_iteration(&self, tol: f64, max_iter: usize) -> NormEstimate {
        let n = self.cols;
        let mut w = Vector::from_raw(vec![1.0 / (n as f64).sqrt(); n]);
        let mut sigma = 0.0_f64;
        let mut used = 0;
        let mut perturbed = false;

        while used < max_iter {
            let mut stable = 0;
            while used < max_iter {
                used += 1;
                let lw = self.apply(&w).expect("dims fixed");
                let v = self.adjoint_apply(&lw).expect("dims fixed");
                let lambda = w.dot(&v).max(0.0);
                let next = lambda.sqrt();
                let vnorm = v.norm();
                if vnorm == 0.0 {
                    // w is in the null space; restart from a perturbed point.
                    break;
                }
                let delta = (next - sigma).abs();
                sigma = next;
                w = v.scale(1.0 / vnorm);
                if delta <= tol * sigma.max(f64::MIN_POSITIVE) {
                    stable += 1;
                    if stable >= 2 {
                        break;
                    }
                } else {
                    stable = 0;
                }
            }
            if perturbed {
                return NormEstimate {
                    value: sigma,
                    converged: true,
                    exact: false,
                };
            }
            // Verification pass: nudge the converged vector and re-iterate.
            // If the start was orthogonal to the top eigenspace the estimate
            // climbs and the loop keeps going from the perturbed vector.
            let mut rng = ChaCha8Rng::seed_from_u64(PERTURB_SEED);
            let noise: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut data = w.as_slice().to_vec();
            for (d, q) in data.iter_mut().zip(noise) {
                *d += 1e-3 * q;
            }
            let nudged = Vector::from_raw(data);
            w = nudged.scale(1.0 / nudged.norm());
            perturbed = true;
        }

        NormEstimate {
            value: sigma * 1.01,
            converged: false,
            exact: false,
        }
    }

    /// Solves `self * x = b` for symmetric positive definite `self` by
    /// Cholesky factorization. Rank deficiency surfaces as an error rather
    /// than a silently regularized solution.
    pub fn solve_spd(&self, b: &Vector) -> Result<Vector, CoreError> {
        if self.rows != self.cols {
            return Err(CoreError::InvalidShape(format!(
                "solve_spd needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        if b.dim() != self.rows {
            return Err(CoreError::dim("solve_spd rhs", self.rows, b.dim()));
        }
        let n = self.rows;
        let mut chol = vec![0.0; n * n];
        let scale: f64 = (0..n)
            .map(|i| self.entries[i * n + i].abs())
            .fold(0.0, f64::max)
            .max(1.0);
        for j in 0..n {
            for i in j..n {
                let mut sum = self.entries[i * n + j];
                for k in 0..j {
                    sum -= chol[i * n + k] * chol[j * n + k];
                }
                if i == j {
                    if sum <= scale * 1e-13 {
                        return Err(CoreError::NotPositiveDefinite(format!(
                            "pivot {j} is {sum:.3e}"
                        )));
                    }
                    chol[j * n + j] = sum.sqrt();
                } else {
                    chol[i * n + j] = sum / chol[j * n + j];
                }
            }
        }
        // Forward then backward substitution.
        let mut y = b.as_slice().to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= chol[i * n + k] * y[k];
            }
            y[i] /= chol[i * n + i];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                y[i] -= chol[k * n + i] * y[k];
            }
            y[i] /= chol[i * n + i];
        }
        Ok(Vector::from_raw(y))
    }
}
