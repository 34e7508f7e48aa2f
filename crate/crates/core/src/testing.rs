//! Seeded random fixtures for unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bc::BoundaryConditions;
use crate::graph::{ExternalEdge, InternalEdge, MetricGraph, Sign};
use crate::linalg::{c, CMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_unitary(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    g.qr().q()
}

pub fn random_bc(n: usize, m: usize, rng: &mut ChaCha8Rng) -> BoundaryConditions {
    BoundaryConditions::from_unitary(&random_unitary(n + m, rng), n, m).expect("unitary")
}

/// Two vertices, one or two edges of each sign, random lengths and coupling.
pub fn random_compact_pair(seed: u64) -> (MetricGraph, BoundaryConditions) {
    let mut r = rng(seed);
    let mut internal = Vec::new();
    for (k, sign) in [Sign::Plus, Sign::Minus].into_iter().enumerate() {
        for j in 0..r.random_range(1..=2usize) {
            internal.push(InternalEdge {
                id: format!("i{k}{j}"),
                sign,
                from: "u".into(),
                to: "w".into(),
                length: r.random_range(0.3..2.0),
            });
        }
    }
    let g = MetricGraph::new(vec!["u".into(), "w".into()], vec![], internal).expect("valid");
    let idx = g.boundary_index();
    let bc = random_bc(idx.n, idx.m, &mut r);
    (g, bc)
}

/// Star graph with `plus` positive and `minus` negative half-lines and random coupling.
pub fn random_star(plus: usize, minus: usize, seed: u64) -> (MetricGraph, BoundaryConditions) {
    let mut r = rng(seed);
    let mut external = Vec::new();
    for i in 0..plus {
        external.push(ExternalEdge {
            id: format!("p{i}"),
            sign: Sign::Plus,
            at: "v".into(),
        });
    }
    for i in 0..minus {
        external.push(ExternalEdge {
            id: format!("m{i}"),
            sign: Sign::Minus,
            at: "v".into(),
        });
    }
    let g = MetricGraph::new(vec!["v".into()], external, vec![]).expect("valid");
    let bc = random_bc(plus, minus, &mut r);
    (g, bc)
}
