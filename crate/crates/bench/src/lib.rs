//! Fixtures shared by the benchmarks.

use signgraph::graph::{ExternalEdge, InternalEdge};
use signgraph::{bc, BoundaryConditions, MetricGraph, Sign};

/// Ring of `n` vertices with alternating edge signs, one positive and one
/// negative half-line attached, standard signed vertex conditions.
pub fn ring(n: usize) -> (MetricGraph, BoundaryConditions) {
    let vertices: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let internal = (0..n)
        .map(|i| InternalEdge {
            id: format!("r{i}"),
            sign: if i % 2 == 0 { Sign::Plus } else { Sign::Minus },
            from: vertices[i].clone(),
            to: vertices[(i + 1) % n].clone(),
            length: 0.5 + 0.1 * (i % 7) as f64,
        })
        .collect();
    let external = vec![
        ExternalEdge {
            id: "in".into(),
            sign: Sign::Plus,
            at: vertices[0].clone(),
        },
        ExternalEdge {
            id: "out".into(),
            sign: Sign::Minus,
            at: vertices[n / 2].clone(),
        },
    ];
    let g = MetricGraph::new(vertices, external, internal).expect("valid ring");
    let bc = bc::standard_signed_vertices(&g).expect("positive degrees");
    (g, bc)
}
