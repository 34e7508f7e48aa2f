//! Seeded fixtures shared by the integration and acceptance tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signgraph::graph::{ExternalEdge, InternalEdge};
use signgraph::{BoundaryConditions, CMatrix, Complex64, MetricGraph, Sign};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_unitary(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    g.qr().q()
}

pub fn random_bc(n: usize, m: usize, rng: &mut ChaCha8Rng) -> BoundaryConditions {
    BoundaryConditions::from_unitary(&random_unitary(n + m, rng), n, m).expect("unitary")
}

pub fn star(plus: usize, minus: usize) -> MetricGraph {
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
    MetricGraph::new(vec!["v".into()], external, vec![]).expect("valid star")
}

pub fn random_star(plus: usize, minus: usize, rng: &mut ChaCha8Rng) -> (MetricGraph, BoundaryConditions) {
    (star(plus, minus), random_bc(plus, minus, rng))
}

/// Two vertices joined by one or two edges of each sign, plus optional half-lines.
pub fn random_graph(rng: &mut ChaCha8Rng, with_external: bool) -> (MetricGraph, BoundaryConditions) {
    let mut internal = Vec::new();
    for (k, sign) in [Sign::Plus, Sign::Minus].into_iter().enumerate() {
        for j in 0..rng.random_range(1..=2usize) {
            internal.push(InternalEdge {
                id: format!("i{k}{j}"),
                sign,
                from: "u".into(),
                to: "w".into(),
                length: rng.random_range(0.3..2.0),
            });
        }
    }
    let mut external = Vec::new();
    if with_external {
        external.push(ExternalEdge {
            id: "ep".into(),
            sign: Sign::Plus,
            at: "u".into(),
        });
        external.push(ExternalEdge {
            id: "em".into(),
            sign: Sign::Minus,
            at: "w".into(),
        });
    }
    let g = MetricGraph::new(vec!["u".into(), "w".into()], external, internal).expect("valid graph");
    let idx = g.boundary_index();
    let bc = random_bc(idx.n, idx.m, rng);
    (g, bc)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
