use proxkit_core::{CoreError, LinearOperator, Vector};
use rand::Rng;

use crate::error::Error;
use crate::prox::{ExtendedReal, MEMBERSHIP_TOL};

/// A nonempty closed convex set with a closed-form projection.
///
/// Every kind can produce a witness point, decide membership to within
/// [`MEMBERSHIP_TOL`] on its defining residual, and evaluate its support
/// function where that has a closed form.
#[derive(Debug, Clone)]
pub enum ConvexSet {
    /// The whole space.
    WholeSpace { dim: usize },
    /// `{ x : lo <= x <= hi }` componentwise, finite bounds.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `{ x : ||x - center|| <= radius }`.
    Ball { center: Vector, radius: f64 },
    /// `{ x : <normal, x> <= offset }`.
    Halfspace { normal: Vector, offset: f64 },
    /// `{ x : <normal, x> = offset }`.
    Hyperplane { normal: Vector, offset: f64 },
    /// A single point.
    Singleton { point: Vector },
    /// `{ x : A x = rhs }`; the projection solves the normal equations.
    Affine { matrix: LinearOperator, rhs: Vector },
    /// `{ x : x >= 0 }` componentwise.
    NonnegOrthant { dim: usize },
    /// Cartesian product of factors, acting on the stacked vector.
    Product { factors: Vec<ConvexSet> },
}

impl ConvexSet {
    pub fn whole_space(dim: usize) -> Result<Self, Error> {
        if dim == 0 {
            return Err(Error::Config("whole_space needs dim >= 1".into()));
        }
        Ok(ConvexSet::WholeSpace { dim })
    }

    pub fn box_set(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, Error> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::Config("box bounds must be nonempty and match".into()));
        }
        if lo.iter().chain(hi.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Config("box bounds must be finite".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::Config("box needs lo <= hi on every axis".into()));
        }
        Ok(ConvexSet::Box { lo, hi })
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self, Error> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::Config(format!("ball radius {radius} must be >= 0")));
        }
        Ok(ConvexSet::Ball { center, radius })
    }

    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self, Error> {
        if normal.norm() == 0.0 {
            return Err(Error::Config("halfspace normal must be nonzero".into()));
        }
        if !offset.is_finite() {
            return Err(Error::Config("halfspace offset must be finite".into()));
        }
        Ok(ConvexSet::Halfspace { normal, offset })
    }

    pub fn hyperplane(normal: Vector, offset: f64) -> Result<Self, Error> {
        if normal.norm() == 0.0 {
            return Err(Error::Config("hyperplane normal must be nonzero".into()));
        }
        if !offset.is_finite() {
            return Err(Error::Config("hyperplane offset must be finite".into()));
        }
        Ok(ConvexSet::Hyperplane { normal, offset })
    }

    pub fn singleton(point: Vector) -> Self {
        ConvexSet::Singleton { point }
    }

    pub fn affine(matrix: LinearOperator, rhs: Vector) -> Result<Self, Error> {
        if rhs.dim() != matrix.rows() {
            return Err(Error::dim("affine rhs", matrix.rows(), rhs.dim()));
        }
        Ok(ConvexSet::Affine { matrix, rhs })
    }

    pub fn nonneg_orthant(dim: usize) -> Result<Self, Error> {
        if dim == 0 {
            return Err(Error::Config("nonneg_orthant needs dim >= 1".into()));
        }
        Ok(ConvexSet::NonnegOrthant { dim })
    }

    pub fn product(factors: Vec<ConvexSet>) -> Result<Self, Error> {
        if factors.is_empty() {
            return Err(Error::Config("product of no sets".into()));
        }
        Ok(ConvexSet::Product { factors })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::WholeSpace { dim } => *dim,
            ConvexSet::Box { lo, .. } => lo.len(),
            ConvexSet::Ball { center, .. } => center.dim(),
            ConvexSet::Halfspace { normal, .. } => normal.dim(),
            ConvexSet::Hyperplane { normal, .. } => normal.dim(),
            ConvexSet::Singleton { point } => point.dim(),
            ConvexSet::Affine { matrix, .. } => matrix.cols(),
            ConvexSet::NonnegOrthant { dim } => *dim,
            ConvexSet::Product { factors } => factors.iter().map(|f| f.dim()).sum(),
        }
    }

    fn check_dim(&self, x: &Vector, context: &str) -> Result<(), Error> {
        if x.dim() != self.dim() {
            return Err(Error::dim(context, self.dim(), x.dim()));
        }
        Ok(())
    }

    /// Nearest point of the set.
    pub fn project(&self, x: &Vector) -> Result<Vector, Error> {
        self.check_dim(x, "project")?;
        match self {
            ConvexSet::WholeSpace { .. } => Ok(x.clone()),
            ConvexSet::Box { lo, hi } => {
                let data = x
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(v, (a, b))| v.clamp(*a, *b))
                    .collect();
                Ok(Vector::new(data)?)
            }
            ConvexSet::Ball { center, radius } => {
                let d = x.sub(center);
                let n = d.norm();
                if n <= *radius {
                    Ok(x.clone())
                } else {
                    Ok(center.axpy(radius / n, &d))
                }
            }
            ConvexSet::Halfspace { normal, offset } => {
                let excess = normal.dot(x) - offset;
                if excess <= 0.0 {
                    Ok(x.clone())
                } else {
                    Ok(x.axpy(-excess / normal.norm_sq(), normal))
                }
            }
            ConvexSet::Hyperplane { normal, offset } => {
                let excess = normal.dot(x) - offset;
                Ok(x.axpy(-excess / normal.norm_sq(), normal))
            }
            ConvexSet::Singleton { point } => Ok(point.clone()),
            ConvexSet::Affine { matrix, rhs } => {
                let residual = matrix.apply(x)?.sub(rhs);
                let multiplier = solve_gram(matrix, &residual)?;
                Ok(x.sub(&matrix.adjoint_apply(&multiplier)?))
            }
            ConvexSet::NonnegOrthant { .. } => {
                Ok(Vector::new(x.iter().map(|v| v.max(0.0)).collect())?)
            }
            ConvexSet::Product { factors } => {
                let mut out = Vec::with_capacity(x.dim());
                let mut offset = 0;
                for f in factors {
                    let d = f.dim();
                    let part = Vector::new(x.as_slice()[offset..offset + d].to_vec())?;
                    out.extend_from_slice(f.project(&part)?.as_slice());
                    offset += d;
                }
                Ok(Vector::new(out)?)
            }
        }
    }

    /// Membership to within [`MEMBERSHIP_TOL`] on the defining residual.
    pub fn contains(&self, x: &Vector) -> Result<bool, Error> {
        self.check_dim(x, "contains")?;
        let tol = MEMBERSHIP_TOL;
        Ok(match self {
            ConvexSet::WholeSpace { .. } => true,
            ConvexSet::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (a, b))| *v >= a - tol && *v <= b + tol),
            ConvexSet::Ball { center, radius } => x.dist(center) <= radius + tol,
            ConvexSet::Halfspace { normal, offset } => normal.dot(x) - offset <= tol,
            ConvexSet::Hyperplane { normal, offset } => (normal.dot(x) - offset).abs() <= tol,
            ConvexSet::Singleton { point } => x.max_abs_diff(point) <= tol,
            ConvexSet::Affine { matrix, rhs } => {
                matrix.apply(x)?.sub(rhs).iter().all(|r| r.abs() <= tol)
            }
            ConvexSet::NonnegOrthant { .. } => x.iter().all(|v| *v >= -tol),
            ConvexSet::Product { factors } => {
                let mut offset = 0;
                for f in factors {
                    let d = f.dim();
                    let part = Vector::new(x.as_slice()[offset..offset + d].to_vec())?;
                    if !f.contains(&part)? {
                        return Ok(false);
                    }
                    offset += d;
                }
                true
            }
        })
    }

    /// A member point, witnessing nonemptiness.
    pub fn witness(&self) -> Result<Vector, Error> {
        match self {
            ConvexSet::WholeSpace { dim } => Ok(Vector::zeros(*dim)),
            ConvexSet::Box { lo, hi } => Ok(Vector::new(
                lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect(),
            )?),
            ConvexSet::Ball { center, .. } => Ok(center.clone()),
            ConvexSet::Halfspace { normal, offset }
            | ConvexSet::Hyperplane { normal, offset } => {
                Ok(normal.scale(offset / normal.norm_sq()))
            }
            ConvexSet::Singleton { point } => Ok(point.clone()),
            ConvexSet::Affine { matrix, rhs } => {
                let multiplier = solve_gram(matrix, rhs)?;
                Ok(matrix.adjoint_apply(&multiplier)?)
            }
            ConvexSet::NonnegOrthant { dim } => Ok(Vector::zeros(*dim)),
            ConvexSet::Product { factors } => {
                let mut out = Vec::new();
                for f in factors {
                    out.extend_from_slice(f.witness()?.as_slice());
                }
                Ok(Vector::new(out)?)
            }
        }
    }

    /// Whether the set is bounded (hence compact, being closed).
    pub fn is_compact(&self) -> bool {
        match self {
            ConvexSet::Box { .. } | ConvexSet::Ball { .. } | ConvexSet::Singleton { .. } => true,
            ConvexSet::Product { factors } => factors.iter().all(|f| f.is_compact()),
            _ => false,
        }
    }

    /// Support function `sup { <y, v> : y in set }`.
    pub fn support_value(&self, v: &Vector) -> Result<ExtendedReal, Error> {
        self.check_dim(v, "support_value")?;
        let tol = MEMBERSHIP_TOL;
        Ok(match self {
            ConvexSet::WholeSpace { .. } => {
                if v.norm() <= tol {
                    ExtendedReal::Finite(0.0)
                } else {
                    ExtendedReal::PlusInfinity
                }
            }
            ConvexSet::Box { lo, hi } => ExtendedReal::from_value(
                v.iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(t, (a, b))| (a * t).max(b * t))
                    .sum(),
            ),
            ConvexSet::Ball { center, radius } => {
                ExtendedReal::from_value(center.dot(v) + radius * v.norm())
            }
            ConvexSet::Halfspace { normal, offset } => {
                // finite only along the outward normal ray
                let t = v.dot(normal) / normal.norm_sq();
                let residual = v.sub(&normal.scale(t)).norm();
                if residual <= tol * (1.0 + v.norm()) && t >= -tol {
                    ExtendedReal::from_value(t.max(0.0) * offset)
                } else {
                    ExtendedReal::PlusInfinity
                }
            }
            ConvexSet::Hyperplane { normal, offset } => {
                let t = v.dot(normal) / normal.norm_sq();
                let residual = v.sub(&normal.scale(t)).norm();
                if residual <= tol * (1.0 + v.norm()) {
                    ExtendedReal::from_value(t * offset)
                } else {
                    ExtendedReal::PlusInfinity
                }
            }
            ConvexSet::Singleton { point } => ExtendedReal::from_value(point.dot(v)),
            ConvexSet::Affine { matrix, rhs: _ } => {
                // finite iff v lies in the row space of the constraint matrix
                let av = matrix.apply(v)?;
                let multiplier = solve_gram(matrix, &av)?;
                let projected = matrix.adjoint_apply(&multiplier)?;
                if v.sub(&projected).norm() <= tol * (1.0 + v.norm()) {
                    ExtendedReal::from_value(self.witness()?.dot(v))
                } else {
                    ExtendedReal::PlusInfinity
                }
            }
            ConvexSet::NonnegOrthant { .. } => {
                if v.iter().all(|t| *t <= tol) {
                    ExtendedReal::Finite(0.0)
                } else {
                    ExtendedReal::PlusInfinity
                }
            }
            ConvexSet::Product { factors } => {
                let mut total = ExtendedReal::Finite(0.0);
                let mut offset = 0;
                for f in factors {
                    let d = f.dim();
                    let part = Vector::new(v.as_slice()[offset..offset + d].to_vec())?;
                    total = total + f.support_value(&part)?;
                    offset += d;
                }
                total
            }
        })
    }

    /// A random member, used to sample competitors for the variational
    /// characterization checks. Coverage matters here, not uniformity.
    pub fn sample(&self, rng: &mut dyn rand::RngCore) -> Result<Vector, Error> {
        match self {
            ConvexSet::WholeSpace { dim } => {
                Ok(Vector::new((0..*dim).map(|_| rng.gen_range(-3.0..3.0)).collect())?)
            }
            ConvexSet::Box { lo, hi } => Ok(Vector::new(
                lo.iter()
                    .zip(hi)
                    .map(|(a, b)| if a == b { *a } else { rng.gen_range(*a..*b) })
                    .collect(),
            )?),
            ConvexSet::Ball { center, radius } => {
                let dim = center.dim();
                let dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let dir = Vector::new(dir)?;
                let n = dir.norm();
                if n == 0.0 {
                    return Ok(center.clone());
                }
                let r = radius * rng.gen_range(0.0..1.0f64).powf(1.0 / dim as f64);
                Ok(center.axpy(r / n, &dir))
            }
            ConvexSet::Halfspace { normal, offset } => {
                let base = self.witness()?;
                let dim = base.dim();
                let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let y = base.add(&Vector::new(u)?);
                let excess = normal.dot(&y) - offset;
                if excess > 0.0 {
                    // reflect across the boundary to land inside
                    Ok(y.axpy(-2.0 * excess / normal.norm_sq(), normal))
                } else {
                    Ok(y)
                }
            }
            ConvexSet::Hyperplane { normal, offset } => {
                let dim = normal.dim();
                let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let u = Vector::new(u)?;
                let t = (normal.dot(&u) - offset) / normal.norm_sq();
                Ok(u.axpy(-t, normal))
            }
            ConvexSet::Singleton { point } => Ok(point.clone()),
            ConvexSet::Affine { matrix, .. } => {
                let base = self.witness()?;
                let dim = matrix.cols();
                let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let u = Vector::new(u)?;
                // null-space component of u added to the witness
                let au = matrix.apply(&u)?;
                let multiplier = solve_gram(matrix, &au)?;
                let row_component = matrix.adjoint_apply(&multiplier)?;
                Ok(base.add(&u.sub(&row_component)))
            }
            ConvexSet::NonnegOrthant { dim } => {
                Ok(Vector::new((0..*dim).map(|_| rng.gen_range(0.0..3.0)).collect())?)
            }
            ConvexSet::Product { factors } => {
                let mut out = Vec::new();
                for f in factors {
                    out.extend_from_slice(f.sample(rng)?.as_slice());
                }
                Ok(Vector::new(out)?)
            }
        }
    }
}

/// Solves `(A A*) m = b`, the Gram system behind affine projections.
/// Rank deficiency is surfaced as a capability error rather than being
/// papered over with a pseudo-inverse.
fn solve_gram(matrix: &LinearOperator, b: &Vector) -> Result<Vector, Error> {
    let gram = matrix.compose(&matrix.transpose())?;
    gram.solve_spd(b).map_err(|e| match e {
        CoreError::NotPositiveDefinite(msg) => Error::Capability(format!(
            "affine constraint matrix is rank deficient ({msg})"
        )),
        other => Error::Core(other),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(data: &[f64]) -> Vector {
        Vector::from_slice(data).unwrap()
    }

    #[test]
    fn box_projection_clamps() {
        let c = ConvexSet::box_set(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(c.project(&v(&[2.0, -1.0])).unwrap(), v(&[1.0, 0.0]));
        assert!(c.contains(&v(&[0.5, 1.0])).unwrap());
        assert!(!c.contains(&v(&[2.0, 0.0])).unwrap());
    }

    #[test]
    fn ball_projection_scales_radially() {
        let c = ConvexSet::ball(Vector::zeros(2), 1.0).unwrap();
        let p = c.project(&v(&[3.0, 4.0])).unwrap();
        assert!(p.max_abs_diff(&v(&[0.6, 0.8])) <= 1e-15);
        assert_eq!(c.project(&v(&[0.1, 0.2])).unwrap(), v(&[0.1, 0.2]));
    }

    #[test]
    fn hyperplane_projection_closed_form() {
        let c = ConvexSet::hyperplane(v(&[1.0, 1.0]), 2.0).unwrap();
        assert_eq!(c.project(&v(&[3.0, 3.0])).unwrap(), v(&[1.0, 1.0]));
        assert!(c.contains(&v(&[0.5, 1.5])).unwrap());
    }

    #[test]
    fn halfspace_projection() {
        let c = ConvexSet::halfspace(v(&[1.0, 0.0]), 0.0).unwrap();
        assert_eq!(c.project(&v(&[1.0, 1.0])).unwrap(), v(&[0.0, 1.0]));
        assert_eq!(c.project(&v(&[-1.0, 1.0])).unwrap(), v(&[-1.0, 1.0]));
    }

    #[test]
    fn affine_projection_solves_normal_equations() {
        // constraint x1 + x2 = 2 expressed as a 1x2 system
        let a = LinearOperator::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let c = ConvexSet::affine(a, v(&[2.0])).unwrap();
        let p = c.project(&v(&[3.0, 3.0])).unwrap();
        assert!(p.max_abs_diff(&v(&[1.0, 1.0])) <= 1e-12);
        assert!(c.contains(&p).unwrap());
        // rank-deficient system is a capability error
        let bad = LinearOperator::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let cs = ConvexSet::affine(bad, v(&[2.0, 2.0])).unwrap();
        assert!(matches!(
            cs.project(&v(&[0.0, 0.0])),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn witnesses_are_members() {
        let sets = vec![
            ConvexSet::whole_space(2).unwrap(),
            ConvexSet::box_set(vec![0.0, -1.0], vec![1.0, 5.0]).unwrap(),
            ConvexSet::ball(v(&[1.0, 2.0]), 0.5).unwrap(),
            ConvexSet::halfspace(v(&[1.0, 1.0]), -3.0).unwrap(),
            ConvexSet::hyperplane(v(&[2.0, -1.0]), 1.0).unwrap(),
            ConvexSet::singleton(v(&[4.0, 4.0])),
            ConvexSet::affine(
                LinearOperator::from_rows(&[vec![1.0, 2.0]]).unwrap(),
                v(&[3.0]),
            )
            .unwrap(),
            ConvexSet::nonneg_orthant(2).unwrap(),
        ];
        let product = ConvexSet::product(sets.clone()).unwrap();
        for s in &sets {
            let w = s.witness().unwrap();
            assert!(s.contains(&w).unwrap(), "witness escaped {s:?}");
        }
        let w = product.witness().unwrap();
        assert!(product.contains(&w).unwrap());
        assert_eq!(product.dim(), 16);
    }

    #[test]
    fn samples_are_members() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let sets = vec![
            ConvexSet::box_set(vec![0.0, -1.0], vec![1.0, 5.0]).unwrap(),
            ConvexSet::ball(v(&[1.0, 2.0]), 0.5).unwrap(),
            ConvexSet::halfspace(v(&[1.0, 1.0]), -3.0).unwrap(),
            ConvexSet::hyperplane(v(&[2.0, -1.0]), 1.0).unwrap(),
            ConvexSet::affine(
                LinearOperator::from_rows(&[vec![1.0, 2.0]]).unwrap(),
                v(&[3.0]),
            )
            .unwrap(),
            ConvexSet::nonneg_orthant(2).unwrap(),
        ];
        for s in &sets {
            for _ in 0..50 {
                let y = s.sample(&mut rng).unwrap();
                assert!(s.contains(&y).unwrap(), "sample escaped {s:?}");
            }
        }
    }

    #[test]
    fn support_values() {
        let b = ConvexSet::box_set(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(b.support_value(&v(&[2.0, -3.0])).unwrap().finite(), Some(5.0));
        let ball = ConvexSet::ball(Vector::zeros(2), 2.0).unwrap();
        assert_eq!(ball.support_value(&v(&[3.0, 4.0])).unwrap().finite(), Some(10.0));
        let hs = ConvexSet::halfspace(v(&[1.0, 0.0]), 0.0).unwrap();
        assert_eq!(hs.support_value(&v(&[2.0, 0.0])).unwrap().finite(), Some(0.0));
        assert!(!hs.support_value(&v(&[0.0, 1.0])).unwrap().is_finite());
        assert!(!hs.support_value(&v(&[-1.0, 0.0])).unwrap().is_finite());
        let orth = ConvexSet::nonneg_orthant(2).unwrap();
        assert!(orth.support_value(&v(&[-1.0, -2.0])).unwrap().is_finite());
        assert!(!orth.support_value(&v(&[1.0, -2.0])).unwrap().is_finite());
    }

    #[test]
    fn compactness_classification() {
        assert!(ConvexSet::box_set(vec![0.0], vec![1.0]).unwrap().is_compact());
        assert!(ConvexSet::ball(Vector::zeros(3), 1.0).unwrap().is_compact());
        assert!(!ConvexSet::whole_space(2).unwrap().is_compact());
        assert!(!ConvexSet::halfspace(v(&[1.0]), 0.0).unwrap().is_compact());
        let p = ConvexSet::product(vec![
            ConvexSet::ball(Vector::zeros(1), 1.0).unwrap(),
            ConvexSet::nonneg_orthant(1).unwrap(),
        ])
        .unwrap();
        assert!(!p.is_compact());
    }

    #[test]
    fn projection_characterization_sampled() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let sets = vec![
            ConvexSet::box_set(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
            ConvexSet::ball(v(&[0.5, -0.5]), 1.5).unwrap(),
            ConvexSet::halfspace(v(&[1.0, 2.0]), 1.0).unwrap(),
            ConvexSet::hyperplane(v(&[1.0, -1.0]), 0.5).unwrap(),
            ConvexSet::nonneg_orthant(2).unwrap(),
        ];
        for s in &sets {
            let x = v(&[rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]);
            let p = s.project(&x).unwrap();
            assert!(s.contains(&p).unwrap());
            for _ in 0..100 {
                let y = s.sample(&mut rng).unwrap();
                let inner = y.sub(&p).dot(&x.sub(&p));
                assert!(inner <= 1e-9, "characterization failed for {s:?}: {inner}");
            }
        }
    }
}
