//! Small named graphs with boundary conditions, used by examples, tests and benches.

use crate::bc::{standard_signed_vertex, standard_signed_vertices, BoundaryConditions};
use crate::graph::{ExternalEdge, InternalEdge, MetricGraph, Sign};
use crate::linalg;

fn ext(id: &str, sign: Sign, at: &str) -> ExternalEdge {
    ExternalEdge {
        id: id.into(),
        sign,
        at: at.into(),
    }
}

fn int(id: &str, sign: Sign, from: &str, to: &str, length: f64) -> InternalEdge {
    InternalEdge {
        id: id.into(),
        sign,
        from: from.into(),
        to: to.into(),
        length,
    }
}

/// One positive and one negative half-line at a single vertex.
pub fn real_line() -> (MetricGraph, BoundaryConditions) {
    let g = MetricGraph::new(
        vec!["v".into()],
        vec![ext("e1", Sign::Plus, "v"), ext("e2", Sign::Minus, "v")],
        vec![],
    )
    .expect("valid graph");
    let bc = BoundaryConditions::with_dims(
        linalg::from_real_rows(&[&[-1.0, 1.0], &[0.0, 0.0]]),
        linalg::from_real_rows(&[&[0.0, 0.0], &[-1.0, 1.0]]),
        1,
        1,
    )
    .expect("2x2");
    (g, bc)
}

/// A single half-line of the given sign with Neumann condition.
pub fn half_line(sign: Sign) -> (MetricGraph, BoundaryConditions) {
    let g = MetricGraph::new(vec!["v".into()], vec![ext("e", sign, "v")], vec![]).expect("valid graph");
    let (n, m) = match sign {
        Sign::Plus => (1, 0),
        Sign::Minus => (0, 1),
    };
    (g, BoundaryConditions::neumann(n, m))
}

/// Two positive half-lines joined by a negative edge of length `a`.
pub fn two_vertex(a: f64) -> (MetricGraph, BoundaryConditions) {
    let g = MetricGraph::new(
        vec!["v1".into(), "v2".into()],
        vec![ext("e1", Sign::Plus, "v1"), ext("e2", Sign::Plus, "v2")],
        vec![int("i3", Sign::Minus, "v1", "v2", a)],
    )
    .expect("valid graph");
    // slots: e1, e2, i3 origin, i3 terminus
    let bc = BoundaryConditions::with_dims(
        linalg::from_real_rows(&[
            &[1.0, 0.0, -1.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, -1.0],
            &[0.0, 0.0, 0.0, 0.0],
        ]),
        linalg::from_real_rows(&[
            &[0.0, 0.0, 0.0, 0.0],
            &[1.0, 0.0, -1.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, -1.0],
        ]),
        2,
        2,
    )
    .expect("4x4");
    (g, bc)
}

/// Star with two positive and one negative half-line, standard signed vertex.
pub fn three_star() -> (MetricGraph, BoundaryConditions) {
    let g = MetricGraph::new(
        vec!["v".into()],
        vec![
            ext("e1", Sign::Plus, "v"),
            ext("e2", Sign::Plus, "v"),
            ext("e3", Sign::Minus, "v"),
        ],
        vec![],
    )
    .expect("valid graph");
    let (a, b) = standard_signed_vertex(2, 1).expect("degree 3");
    (g, BoundaryConditions::with_dims(a, b, 2, 1).expect("3x3"))
}

/// A single internal edge between two vertices.
pub fn interval(sign: Sign, a: f64) -> MetricGraph {
    MetricGraph::new(
        vec!["u".into(), "w".into()],
        vec![],
        vec![int("i", sign, "u", "w", a)],
    )
    .expect("valid graph")
}

/// Positive edge of length `a_plus` and negative edge of length `a_minus`
/// between the same two vertices, standard signed vertex conditions.
pub fn compact_two_edge(a_plus: f64, a_minus: f64) -> (MetricGraph, BoundaryConditions) {
    let g = MetricGraph::new(
        vec!["u".into(), "w".into()],
        vec![],
        vec![
            int("p", Sign::Plus, "u", "w", a_plus),
            int("q", Sign::Minus, "u", "w", a_minus),
        ],
    )
    .expect("valid graph");
    let bc = standard_signed_vertices(&g).expect("nonzero degrees");
    (g, bc)
}

/// Positive edge of length `a_plus` and negative edge of length `a_minus`, each
/// with Dirichlet conditions at both ends.
pub fn dirichlet_pair(a_plus: f64, a_minus: f64) -> (MetricGraph, BoundaryConditions) {
    let g = MetricGraph::new(
        vec!["u1".into(), "w1".into(), "u2".into(), "w2".into()],
        vec![],
        vec![
            int("p", Sign::Plus, "u1", "w1", a_plus),
            int("q", Sign::Minus, "u2", "w2", a_minus),
        ],
    )
    .expect("valid graph");
    (g, BoundaryConditions::dirichlet(2, 2))
}
