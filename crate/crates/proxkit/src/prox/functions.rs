use proxkit_core::{LinearOperator, Vector};
use rand::Rng;

use crate::error::Error;
use crate::prox::sets::ConvexSet;
use crate::prox::{ExtendedReal, MEMBERSHIP_TOL};

/// Componentwise soft threshold `sign(v) * max(|v| - t, 0)`.
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

/// A proper lower-semicontinuous convex function from a closed catalog,
/// exposing its value and its prox step in closed form.
///
/// Conjugates are never given separate formulas: `prox` of a conjugate
/// always goes through the Moreau decomposition
/// `prox_{g f*}(u) = u - g * prox_{f/g}(u/g)`, so there is one code path
/// to test.
#[derive(Debug, Clone)]
pub struct ProxFunction {
    kind: ProxKind,
    dim: usize,
    /// A point with finite value, fixed at construction; witnesses that
    /// the function is proper.
    feasible: Vector,
}

#[derive(Debug, Clone)]
enum ProxKind {
    /// The zero function; prox is the identity.
    Zero,
    /// Indicator of a convex set; prox is the projection.
    Indicator(ConvexSet),
    /// The l1 norm; prox is the soft threshold.
    L1,
    /// `||x||_1 + (curvature/2) ||x||^2`; prox is a scaled soft threshold.
    L1PlusQuadratic { curvature: f64 },
    /// `sum_k phi_k(<x, q_k>)` over scalar functions, optionally in an
    /// orthonormal basis Q (columns q_k); identity basis when absent.
    Separable {
        components: Vec<ProxFunction>,
        basis: Option<LinearOperator>,
    },
    /// `weight * base` with positive weight.
    Scaled { base: Box<ProxFunction>, weight: f64 },
    /// `x -> base(anchor - x)`.
    ReflectedTranslated {
        base: Box<ProxFunction>,
        anchor: Vector,
    },
    /// Support function of a convex set.
    Support(ConvexSet),
    /// Fenchel conjugate of the base function.
    Conjugate(Box<ProxFunction>),
    /// `x -> 0.5 ||L x - data||^2` accessed through its prox (a linear
    /// solve) rather than through a gradient.
    QuadraticData { op: LinearOperator, data: Vector },
}

impl ProxFunction {
    pub fn zero(dim: usize) -> Result<Self, Error> {
        if dim == 0 {
            return Err(Error::Config("zero function needs dim >= 1".into()));
        }
        Ok(Self {
            kind: ProxKind::Zero,
            dim,
            feasible: Vector::zeros(dim),
        })
    }

    pub fn indicator(set: ConvexSet) -> Result<Self, Error> {
        let feasible = set.witness()?;
        Ok(Self {
            dim: set.dim(),
            kind: ProxKind::Indicator(set),
            feasible,
        })
    }

    pub fn l1(dim: usize) -> Result<Self, Error> {
        if dim == 0 {
            return Err(Error::Config("l1 needs dim >= 1".into()));
        }
        Ok(Self {
            kind: ProxKind::L1,
            dim,
            feasible: Vector::zeros(dim),
        })
    }

    pub fn l1_plus_quadratic(dim: usize, curvature: f64) -> Result<Self, Error> {
        if dim == 0 {
            return Err(Error::Config("l1_plus_quadratic needs dim >= 1".into()));
        }
        if !(curvature.is_finite() && curvature > 0.0) {
            return Err(Error::Config(format!(
                "l1_plus_quadratic curvature {curvature} must be positive"
            )));
        }
        Ok(Self {
            kind: ProxKind::L1PlusQuadratic { curvature },
            dim,
            feasible: Vector::zeros(dim),
        })
    }

    pub fn separable(
        components: Vec<ProxFunction>,
        basis: Option<LinearOperator>,
    ) -> Result<Self, Error> {
        if components.is_empty() {
            return Err(Error::Config("separable needs at least one component".into()));
        }
        if let Some(k) = components.iter().position(|c| c.dim != 1) {
            return Err(Error::Config(format!(
                "separable component {k} must be scalar (dim 1), got dim {}",
                components[k].dim
            )));
        }
        let n = components.len();
        if let Some(q) = &basis {
            if q.rows() != n || q.cols() != n {
                return Err(Error::Config(format!(
                    "separable basis must be {n}x{n}, got {}x{}",
                    q.rows(),
                    q.cols()
                )));
            }
            // orthonormal columns: Q^T Q = I to 1e-10
            let gram = q.transpose().compose(q)?;
            for r in 0..n {
                for c in 0..n {
                    let want = if r == c { 1.0 } else { 0.0 };
                    if (gram.entry(r, c) - want).abs() > 1e-10 {
                        return Err(Error::Config(format!(
                            "separable basis is not orthonormal at ({r},{c})"
                        )));
                    }
                }
            }
        }
        let coords = Vector::new(components.iter().map(|c| c.feasible[0]).collect())?;
        let feasible = match &basis {
            Some(q) => q.apply(&coords)?,
            None => coords,
        };
        Ok(Self {
            kind: ProxKind::Separable { components, basis },
            dim: n,
            feasible,
        })
    }

    pub fn scaled(base: ProxFunction, weight: f64) -> Result<Self, Error> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::Config(format!(
                "scale weight {weight} must be positive"
            )));
        }
        Ok(Self {
            dim: base.dim,
            feasible: base.feasible.clone(),
            kind: ProxKind::Scaled {
                base: Box::new(base),
                weight,
            },
        })
    }

    pub fn reflected_translated(base: ProxFunction, anchor: Vector) -> Result<Self, Error> {
        if anchor.dim() != base.dim {
            return Err(Error::dim("reflected_translated anchor", base.dim, anchor.dim()));
        }
        let feasible = anchor.sub(&base.feasible);
        Ok(Self {
            dim: base.dim,
            feasible,
            kind: ProxKind::ReflectedTranslated {
                base: Box::new(base),
                anchor,
            },
        })
    }

    pub fn support(set: ConvexSet) -> Result<Self, Error> {
        let dim = set.dim();
        Ok(Self {
            kind: ProxKind::Support(set),
            dim,
            // the support of anything vanishes at the origin
            feasible: Vector::zeros(dim),
        })
    }

    pub fn conjugate(base: ProxFunction) -> Result<Self, Error> {
        // Any subgradient of the base is in the conjugate's domain; one is
        // produced by a unit prox step from the base's feasible point.
        let p = base.prox(1.0, &base.feasible)?;
        let feasible = base.feasible.sub(&p);
        Ok(Self {
            dim: base.dim,
            feasible,
            kind: ProxKind::Conjugate(Box::new(base)),
        })
    }

    pub fn quadratic_data(op: LinearOperator, data: Vector) -> Result<Self, Error> {
        if data.dim() != op.rows() {
            return Err(Error::dim("quadratic_data rhs", op.rows(), data.dim()));
        }
        let dim = op.cols();
        Ok(Self {
            dim,
            kind: ProxKind::QuadraticData { op, data },
            feasible: Vector::zeros(dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The stored point with finite value.
    pub fn feasible_point(&self) -> &Vector {
        &self.feasible
    }

    /// The wrapped set if this function is an indicator.
    pub fn as_indicator(&self) -> Option<&ConvexSet> {
        match &self.kind {
            ProxKind::Indicator(c) => Some(c),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            ProxKind::Zero => "zero",
            ProxKind::Indicator(_) => "indicator",
            ProxKind::L1 => "l1",
            ProxKind::L1PlusQuadratic { .. } => "l1_plus_quadratic",
            ProxKind::Separable { .. } => "separable",
            ProxKind::Scaled { .. } => "scaled",
            ProxKind::ReflectedTranslated { .. } => "reflected_translated",
            ProxKind::Support(_) => "support",
            ProxKind::Conjugate(_) => "conjugate",
            ProxKind::QuadraticData { .. } => "quadratic_data",
        }
    }

    fn check_dim(&self, x: &Vector, context: &str) -> Result<(), Error> {
        if x.dim() != self.dim {
            return Err(Error::dim(context, self.dim, x.dim()));
        }
        Ok(())
    }

    /// Function value as an extended real.
    pub fn value(&self, x: &Vector) -> Result<ExtendedReal, Error> {
        self.check_dim(x, "value")?;
        Ok(match &self.kind {
            ProxKind::Zero => ExtendedReal::Finite(0.0),
            ProxKind::Indicator(c) => {
                if c.contains(x)? {
                    ExtendedReal::Finite(0.0)
                } else {
                    ExtendedReal::PlusInfinity
                }
            }
            ProxKind::L1 => ExtendedReal::from_value(x.iter().map(|v| v.abs()).sum()),
            ProxKind::L1PlusQuadratic { curvature } => ExtendedReal::from_value(
                x.iter().map(|v| v.abs()).sum::<f64>() + 0.5 * curvature * x.norm_sq(),
            ),
            ProxKind::Separable { components, basis } => {
                let coords = match basis {
                    Some(q) => q.adjoint_apply(x)?,
                    None => x.clone(),
                };
                let mut total = ExtendedReal::Finite(0.0);
                for (k, c) in components.iter().enumerate() {
                    let xi = Vector::new(vec![coords[k]])?;
                    total = total + c.value(&xi)?;
                }
                total
            }
            ProxKind::Scaled { base, weight } => match base.value(x)? {
                ExtendedReal::Finite(v) => ExtendedReal::from_value(weight * v),
                ExtendedReal::PlusInfinity => ExtendedReal::PlusInfinity,
            },
            ProxKind::ReflectedTranslated { base, anchor } => base.value(&anchor.sub(x))?,
            ProxKind::Support(c) => c.support_value(x)?,
            ProxKind::Conjugate(base) => base.conjugate_value(x)?,
            ProxKind::QuadraticData { op, data } => {
                ExtendedReal::from_value(0.5 * op.apply(x)?.sub(data).norm_sq())
            }
        })
    }

    /// The prox step: unique minimizer of `f(.) + ||x - .||^2 / (2 gamma)`.
    pub fn prox(&self, gamma: f64, x: &Vector) -> Result<Vector, Error> {
        self.check_dim(x, "prox")?;
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Config(format!("prox step {gamma} must be positive")));
        }
        match &self.kind {
            ProxKind::Zero => Ok(x.clone()),
            ProxKind::Indicator(c) => c.project(x),
            ProxKind::L1 => Ok(Vector::new(
                x.iter().map(|v| soft_threshold(*v, gamma)).collect(),
            )?),
            ProxKind::L1PlusQuadratic { curvature } => {
                let shrink = 1.0 + curvature * gamma;
                Ok(Vector::new(
                    x.iter()
                        .map(|v| soft_threshold(v / shrink, gamma / shrink))
                        .collect(),
                )?)
            }
            ProxKind::Separable { components, basis } => {
                let coords = match basis {
                    Some(q) => q.adjoint_apply(x)?,
                    None => x.clone(),
                };
                let mut out = Vec::with_capacity(self.dim);
                for (k, c) in components.iter().enumerate() {
                    let xi = Vector::new(vec![coords[k]])?;
                    out.push(c.prox(gamma, &xi)?[0]);
                }
                let p = Vector::new(out)?;
                Ok(match basis {
                    Some(q) => q.apply(&p)?,
                    None => p,
                })
            }
            ProxKind::Scaled { base, weight } => base.prox(gamma * weight, x),
            ProxKind::ReflectedTranslated { base, anchor } => {
                Ok(anchor.sub(&base.prox(gamma, &anchor.sub(x))?))
            }
            ProxKind::Support(c) => {
                // support is the conjugate of the indicator, so the Moreau
                // decomposition turns its prox into a projection
                Ok(x.sub(&c.project(&x.scale(1.0 / gamma))?.scale(gamma)))
            }
            ProxKind::Conjugate(base) => base.prox_conjugate(gamma, x),
            ProxKind::QuadraticData { op, data } => {
                let n = op.cols();
                let gram = op.transpose().compose(op)?;
                let mut entries = gram.entries().to_vec();
                for v in entries.iter_mut() {
                    *v *= gamma;
                }
                for i in 0..n {
                    entries[i * n + i] += 1.0;
                }
                let system = LinearOperator::new(n, n, entries)?;
                let rhs = x.add(&op.adjoint_apply(data)?.scale(gamma));
                Ok(system.solve_spd(&rhs)?)
            }
        }
    }

    /// Prox of the Fenchel conjugate, always via the Moreau decomposition
    /// `prox_{g f*}(u) = u - g prox_{f/g}(u/g)`.
    pub fn prox_conjugate(&self, gamma: f64, u: &Vector) -> Result<Vector, Error> {
        self.check_dim(u, "prox_conjugate")?;
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Config(format!("prox step {gamma} must be positive")));
        }
        let inner = self.prox(1.0 / gamma, &u.scale(1.0 / gamma))?;
        Ok(u.sub(&inner.scale(gamma)))
    }

    /// Value of the Fenchel conjugate where the catalog knows a closed
    /// form; `quadratic_data` has none and reports a capability error.
    pub fn conjugate_value(&self, u: &Vector) -> Result<ExtendedReal, Error> {
        self.check_dim(u, "conjugate_value")?;
        let tol = MEMBERSHIP_TOL;
        Ok(match &self.kind {
            // conjugate of the zero function: indicator of the origin
            ProxKind::Zero => {
                if u.norm() <= tol {
                    ExtendedReal::Finite(0.0)
                } else {
                    ExtendedReal::PlusInfinity
                }
            }
            ProxKind::Indicator(c) => c.support_value(u)?,
            // conjugate of l1: indicator of the unit sup-norm box
            ProxKind::L1 => {
                if u.iter().all(|v| v.abs() <= 1.0 + tol) {
                    ExtendedReal::Finite(0.0)
                } else {
                    ExtendedReal::PlusInfinity
                }
            }
            // (l1 + c/2 ||.||^2)^* is the squared distance to that box over 2c
            ProxKind::L1PlusQuadratic { curvature } => ExtendedReal::from_value(
                u.iter()
                    .map(|v| (v.abs() - 1.0).max(0.0).powi(2))
                    .sum::<f64>()
                    / (2.0 * curvature),
            ),
            ProxKind::Separable { components, basis } => {
                let coords = match basis {
                    Some(q) => q.adjoint_apply(u)?,
                    None => u.clone(),
                };
                let mut total = ExtendedReal::Finite(0.0);
                for (k, c) in components.iter().enumerate() {
                    let ui = Vector::new(vec![coords[k]])?;
                    total = total + c.conjugate_value(&ui)?;
                }
                total
            }
            // (w f)^*(u) = w f^*(u / w)
            ProxKind::Scaled { base, weight } => {
                match base.conjugate_value(&u.scale(1.0 / weight))? {
                    ExtendedReal::Finite(v) => ExtendedReal::from_value(weight * v),
                    ExtendedReal::PlusInfinity => ExtendedReal::PlusInfinity,
                }
            }
            // (base(anchor - .))^*(u) = <anchor, u> + base^*(-u)
            ProxKind::ReflectedTranslated { base, anchor } => {
                ExtendedReal::from_value(anchor.dot(u)) + base.conjugate_value(&u.scale(-1.0))?
            }
            // conjugate of a support function: indicator of the set
            ProxKind::Support(c) => {
                if c.contains(u)? {
                    ExtendedReal::Finite(0.0)
                } else {
                    ExtendedReal::PlusInfinity
                }
            }
            // biconjugation: the catalog only holds proper closed convex f
            ProxKind::Conjugate(base) => base.value(u)?,
            ProxKind::QuadraticData { .. } => {
                return Err(Error::Capability(
                    "no closed-form conjugate value for quadratic_data".into(),
                ))
            }
        })
    }

    /// Envelope value `f(p) + ||x - p||^2 / (2 rho)` at `p = prox(rho, x)`;
    /// finite for every x.
    pub fn moreau_value(&self, rho: f64, x: &Vector) -> Result<f64, Error> {
        let p = self.prox(rho, x)?;
        let fp = self.value(&p)?.finite().ok_or_else(|| {
            Error::Capability("prox output escaped the function domain".into())
        })?;
        Ok(fp + x.sub(&p).norm_sq() / (2.0 * rho))
    }

    /// Envelope gradient `(x - prox(rho, x)) / rho`; its Lipschitz constant
    /// is `1 / rho`.
    pub fn moreau_grad(&self, rho: f64, x: &Vector) -> Result<Vector, Error> {
        let p = self.prox(rho, x)?;
        Ok(x.sub(&p).scale(1.0 / rho))
    }

    /// A random point with finite value, used to sample competitors for
    /// the variational characterization checks.
    pub fn sample_domain(&self, rng: &mut dyn rand::RngCore) -> Result<Vector, Error> {
        match &self.kind {
            ProxKind::Zero
            | ProxKind::L1
            | ProxKind::L1PlusQuadratic { .. }
            | ProxKind::QuadraticData { .. } => Ok(Vector::new(
                (0..self.dim).map(|_| rng.gen_range(-3.0..3.0)).collect(),
            )?),
            ProxKind::Indicator(c) => c.sample(rng),
            ProxKind::Separable { components, basis } => {
                let mut coords = Vec::with_capacity(self.dim);
                for c in components {
                    coords.push(c.sample_domain(rng)?[0]);
                }
                let w = Vector::new(coords)?;
                Ok(match basis {
                    Some(q) => q.apply(&w)?,
                    None => w,
                })
            }
            ProxKind::Scaled { base, .. } => base.sample_domain(rng),
            ProxKind::ReflectedTranslated { base, anchor } => {
                Ok(anchor.sub(&base.sample_domain(rng)?))
            }
            ProxKind::Support(c) => sample_support_domain(c, rng),
            ProxKind::Conjugate(base) => {
                // subgradients of the base fill the conjugate's domain
                let y = Vector::new(
                    (0..self.dim).map(|_| rng.gen_range(-3.0..3.0)).collect(),
                )?;
                let p = base.prox(1.0, &y)?;
                Ok(y.sub(&p))
            }
        }
    }
}

fn sample_support_domain(
    set: &ConvexSet,
    rng: &mut dyn rand::RngCore,
) -> Result<Vector, Error> {
    if set.is_compact() {
        let dim = set.dim();
        return Ok(Vector::new(
            (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect(),
        )?);
    }
    match set {
        ConvexSet::WholeSpace { dim } => Ok(Vector::zeros(*dim)),
        ConvexSet::Halfspace { normal, .. } => {
            Ok(normal.scale(rng.gen_range(0.0..2.0) / normal.norm()))
        }
        ConvexSet::Hyperplane { normal, .. } => {
            Ok(normal.scale(rng.gen_range(-2.0..2.0) / normal.norm()))
        }
        ConvexSet::NonnegOrthant { dim } => Ok(Vector::new(
            (0..*dim).map(|_| -rng.gen_range(0.0..2.0)).collect(),
        )?),
        ConvexSet::Affine { matrix, .. } => {
            let u = Vector::new(
                (0..matrix.rows()).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            )?;
            Ok(matrix.adjoint_apply(&u)?)
        }
        ConvexSet::Product { factors } => {
            let mut out = Vec::new();
            for f in factors {
                out.extend_from_slice(sample_support_domain(f, rng)?.as_slice());
            }
            Ok(Vector::new(out)?)
        }
        // compact kinds are handled above
        _ => unreachable!("compact kinds sampled from a box"),
    }
}
