#![allow(dead_code)]

use proxkit::prox::{ConvexSet, ProxFunction};
use proxkit_core::{LinearOperator, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vector {
    Vector::new((0..dim).map(|_| rng.gen_range(-scale..scale)).collect()).unwrap()
}

pub fn rotation2(theta: f64) -> LinearOperator {
    let (s, c) = theta.sin_cos();
    LinearOperator::from_rows(&[vec![c, -s], vec![s, c]]).unwrap()
}

/// One randomized instance of every convex-set kind.
pub fn set_catalog(rng: &mut ChaCha8Rng) -> Vec<ConvexSet> {
    let lo: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..0.0)).collect();
    let hi: Vec<f64> = lo.iter().map(|a| a + rng.gen_range(0.5..3.0)).collect();
    vec![
        ConvexSet::whole_space(2).unwrap(),
        ConvexSet::box_set(lo, hi).unwrap(),
        ConvexSet::ball(random_point(rng, 2, 1.5), rng.gen_range(0.2..2.0)).unwrap(),
        ConvexSet::halfspace(random_point(rng, 2, 1.0).add(&Vector::from_slice(&[1.5, 0.0]).unwrap()), rng.gen_range(-1.0..1.0)).unwrap(),
        ConvexSet::hyperplane(random_point(rng, 2, 1.0).add(&Vector::from_slice(&[1.5, 0.0]).unwrap()), rng.gen_range(-1.0..1.0)).unwrap(),
        ConvexSet::singleton(random_point(rng, 2, 2.0)),
        ConvexSet::affine(
            LinearOperator::from_rows(&[vec![rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0)]]).unwrap(),
            random_point(rng, 1, 1.0),
        )
        .unwrap(),
        ConvexSet::nonneg_orthant(2).unwrap(),
        ConvexSet::product(vec![
            ConvexSet::ball(random_point(rng, 1, 1.0), rng.gen_range(0.3..1.5)).unwrap(),
            ConvexSet::box_set(vec![-1.0], vec![1.0]).unwrap(),
        ])
        .unwrap(),
    ]
}

/// One randomized instance of every prox-function kind.
pub fn prox_catalog(rng: &mut ChaCha8Rng) -> Vec<ProxFunction> {
    let mut out = vec![
        ProxFunction::zero(2).unwrap(),
        ProxFunction::l1(3).unwrap(),
        ProxFunction::l1_plus_quadratic(2, rng.gen_range(0.1..4.0)).unwrap(),
    ];
    for set in set_catalog(rng) {
        out.push(ProxFunction::indicator(set).unwrap());
    }
    out.push(
        ProxFunction::separable(
            vec![
                ProxFunction::l1(1).unwrap(),
                ProxFunction::l1_plus_quadratic(1, rng.gen_range(0.2..2.0)).unwrap(),
            ],
            Some(rotation2(rng.gen_range(0.0..std::f64::consts::TAU))),
        )
        .unwrap(),
    );
    out.push(
        ProxFunction::separable(
            vec![ProxFunction::l1(1).unwrap(), ProxFunction::zero(1).unwrap()],
            None,
        )
        .unwrap(),
    );
    out.push(ProxFunction::scaled(ProxFunction::l1(2).unwrap(), rng.gen_range(0.2..5.0)).unwrap());
    out.push(
        ProxFunction::reflected_translated(
            ProxFunction::l1(2).unwrap(),
            random_point(rng, 2, 2.0),
        )
        .unwrap(),
    );
    out.push(
        ProxFunction::support(
            ConvexSet::box_set(vec![-1.0, -0.5], vec![0.5, 1.0]).unwrap(),
        )
        .unwrap(),
    );
    out.push(
        ProxFunction::support(
            ConvexSet::ball(random_point(rng, 2, 1.0), rng.gen_range(0.3..2.0)).unwrap(),
        )
        .unwrap(),
    );
    out.push(ProxFunction::conjugate(ProxFunction::l1(2).unwrap()).unwrap());
    out.push(
        ProxFunction::conjugate(
            ProxFunction::indicator(
                ConvexSet::ball(random_point(rng, 2, 1.0), rng.gen_range(0.5..2.0)).unwrap(),
            )
            .unwrap(),
        )
        .unwrap(),
    );
    out.push(
        ProxFunction::quadratic_data(
            LinearOperator::from_rows(&[
                vec![rng.gen_range(0.5..2.0), rng.gen_range(-0.5..0.5)],
                vec![rng.gen_range(-0.5..0.5), rng.gen_range(0.5..2.0)],
            ])
            .unwrap(),
            random_point(rng, 2, 2.0),
        )
        .unwrap(),
    );
    out
}
