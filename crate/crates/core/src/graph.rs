//! Signed metric graphs and the canonical ordering of the boundary space.
//!
//! Slots are laid out as
//! `[E+ | I+ origins | I+ termini | E- | I- origins | I- termini]`,
//! each group in declaration order. Every other module relies on this layout.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on `n + m`; all linear algebra is dense.
pub const MAX_SLOTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    Origin,
    Terminus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalEdge {
    pub id: String,
    pub sign: Sign,
    pub at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InternalEdge {
    pub id: String,
    pub sign: Sign,
    pub from: String,
    pub to: String,
    pub length: f64,
}

/// On-disk form of a graph. Field names match the JSON keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub external: Vec<ExternalEdge>,
    #[serde(default)]
    pub internal: Vec<InternalEdge>,
}

/// A validated finite metric graph with signed edges.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertices: Vec<String>,
    external: Vec<ExternalEdge>,
    internal: Vec<InternalEdge>,
}

impl MetricGraph {
    pub fn new(
        vertices: Vec<String>,
        external: Vec<ExternalEdge>,
        internal: Vec<InternalEdge>,
    ) -> Result<Self> {
        if external.is_empty() && internal.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut seen = HashSet::new();
        for v in &vertices {
            if !seen.insert(v.as_str()) {
                return Err(Error::DuplicateId(v.clone()));
            }
        }
        let declared = seen;
        let mut ids = HashSet::new();
        let check_vertex = |edge: &str, v: &str| {
            if declared.contains(v) {
                Ok(())
            } else {
                Err(Error::DanglingVertex {
                    edge: edge.to_string(),
                    vertex: v.to_string(),
                })
            }
        };
        for e in &external {
            if !ids.insert(e.id.as_str()) {
                return Err(Error::DuplicateId(e.id.clone()));
            }
            check_vertex(&e.id, &e.at)?;
        }
        for e in &internal {
            if !ids.insert(e.id.as_str()) {
                return Err(Error::DuplicateId(e.id.clone()));
            }
            check_vertex(&e.id, &e.from)?;
            check_vertex(&e.id, &e.to)?;
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(Error::BadLength {
                    edge: e.id.clone(),
                    length: e.length,
                });
            }
        }
        let slots = external.len() + 2 * internal.len();
        if slots > MAX_SLOTS {
            return Err(Error::TooLarge {
                slots,
                cap: MAX_SLOTS,
            });
        }
        Ok(Self {
            vertices,
            external,
            internal,
        })
    }

    pub fn from_document(doc: GraphDocument) -> Result<Self> {
        Self::new(doc.vertices, doc.external, doc.internal)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphDocument =
            serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            vertices: self.vertices.clone(),
            external: self.external.clone(),
            internal: self.internal.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("graph serializes")
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn external(&self) -> &[ExternalEdge] {
        &self.external
    }

    pub fn internal(&self) -> &[InternalEdge] {
        &self.internal
    }

    pub fn is_compact(&self) -> bool {
        self.external.is_empty()
    }

    pub fn external_count(&self, sign: Sign) -> usize {
        self.external.iter().filter(|e| e.sign == sign).count()
    }

    /// Sum of internal lengths carrying `sign`.
    pub fn total_length(&self, sign: Sign) -> f64 {
        self.internal
            .iter()
            .filter(|e| e.sign == sign)
            .map(|e| e.length)
            .sum()
    }

    pub fn external_edge(&self, id: &str) -> Option<&ExternalEdge> {
        self.external.iter().find(|e| e.id == id)
    }

    pub fn internal_edge(&self, id: &str) -> Option<&InternalEdge> {
        self.internal.iter().find(|e| e.id == id)
    }

    /// Sign and length of any edge (`None` length for half-lines).
    pub fn edge(&self, id: &str) -> Option<(Sign, Option<f64>)> {
        if let Some(e) = self.external_edge(id) {
            return Some((e.sign, None));
        }
        self.internal_edge(id).map(|e| (e.sign, Some(e.length)))
    }

    pub fn boundary_index(&self) -> BoundaryIndex {
        BoundaryIndex::new(self)
    }
}

/// Build a graph from a JSON description.
pub fn build_graph(text: &str) -> Result<MetricGraph> {
    MetricGraph::from_json(text)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub edge: String,
    pub endpoint: Endpoint,
    pub sign: Sign,
    pub external: bool,
}

/// Canonical indexing of the boundary space `K = K+ ⊕ K-`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryIndex {
    pub n: usize,
    pub m: usize,
    pub slots: Vec<Slot>,
    /// Slot of each external edge, parallel to `MetricGraph::external`.
    pub external_slot: Vec<usize>,
    /// `(origin, terminus)` slots of each internal edge, parallel to `MetricGraph::internal`.
    pub internal_slots: Vec<(usize, usize)>,
    slot_map: BTreeMap<(String, Endpoint), usize>,
}

impl BoundaryIndex {
    pub fn new(g: &MetricGraph) -> Self {
        let mut slots = Vec::new();
        let mut external_slot = vec![0; g.external.len()];
        let mut internal_slots = vec![(0, 0); g.internal.len()];
        let mut n = 0;
        for sign in [Sign::Plus, Sign::Minus] {
            let start = slots.len();
            for (i, e) in g.external.iter().enumerate().filter(|(_, e)| e.sign == sign) {
                external_slot[i] = slots.len();
                slots.push(Slot {
                    edge: e.id.clone(),
                    endpoint: Endpoint::Origin,
                    sign,
                    external: true,
                });
            }
            for endpoint in [Endpoint::Origin, Endpoint::Terminus] {
                for (i, e) in g.internal.iter().enumerate().filter(|(_, e)| e.sign == sign) {
                    let s = slots.len();
                    match endpoint {
                        Endpoint::Origin => internal_slots[i].0 = s,
                        Endpoint::Terminus => internal_slots[i].1 = s,
                    }
                    slots.push(Slot {
                        edge: e.id.clone(),
                        endpoint,
                        sign,
                        external: false,
                    });
                }
            }
            if sign == Sign::Plus {
                n = slots.len() - start;
            }
        }
        let m = slots.len() - n;
        let slot_map = slots
            .iter()
            .enumerate()
            .map(|(i, s)| ((s.edge.clone(), s.endpoint), i))
            .collect();
        Self {
            n,
            m,
            slots,
            external_slot,
            internal_slots,
            slot_map,
        }
    }

    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    pub fn slot(&self, edge: &str, endpoint: Endpoint) -> Option<usize> {
        self.slot_map.get(&(edge.to_string(), endpoint)).copied()
    }

    /// External slots in χ column order: `E+` then `E-`, declaration order within each.
    pub fn external_columns(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&s| self.slots[s].external).collect()
    }

    pub fn external_columns_of(&self, sign: Sign) -> Vec<usize> {
        (0..self.dim())
            .filter(|&s| self.slots[s].external && self.slots[s].sign == sign)
            .collect()
    }

    pub fn internal_columns(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&s| !self.slots[s].external).collect()
    }

    pub fn sign_of(&self, slot: usize) -> Sign {
        self.slots[slot].sign
    }
}

/// Result of [`glue_graphs`]: the new graph plus where the old slots went.
#[derive(Debug, Clone)]
pub struct GluedGraph {
    pub graph: MetricGraph,
    /// Glued slot of every slot of the first graph.
    pub map1: Vec<usize>,
    /// Glued slot of every slot of the second graph.
    pub map2: Vec<usize>,
    /// Ids of the new internal edges, in identification order.
    pub new_edges: Vec<String>,
}

/// Identify external edges of `g1` with external edges of `g2`.
///
/// Each pair `(e1, e2)` becomes an internal edge from the vertex of `e1` to the
/// vertex of `e2` with the given length. Ids present in both graphs are
/// prefixed with `a:` and `b:`.
pub fn glue_graphs(
    g1: &MetricGraph,
    g2: &MetricGraph,
    ident: &[(String, String)],
    lengths: &[f64],
) -> Result<GluedGraph> {
    if ident.len() != lengths.len() {
        return Err(Error::SizeMismatch(format!(
            "{} identified pairs but {} lengths",
            ident.len(),
            lengths.len()
        )));
    }
    let mut used1 = HashSet::new();
    let mut used2 = HashSet::new();
    for (e1, e2) in ident {
        let x1 = external_or_err(g1, e1)?;
        let x2 = external_or_err(g2, e2)?;
        if x1.sign != x2.sign {
            return Err(Error::SignMismatch(e1.clone(), e2.clone()));
        }
        if !used1.insert(e1.as_str()) {
            return Err(Error::DuplicateId(e1.clone()));
        }
        if !used2.insert(e2.as_str()) {
            return Err(Error::DuplicateId(e2.clone()));
        }
    }

    let v2: HashSet<&str> = g2.vertices.iter().map(String::as_str).collect();
    let v1: HashSet<&str> = g1.vertices.iter().map(String::as_str).collect();
    let edge_ids = |g: &MetricGraph| -> HashSet<String> {
        g.external
            .iter()
            .map(|e| e.id.clone())
            .chain(g.internal.iter().map(|e| e.id.clone()))
            .collect()
    };
    let (ids1, ids2) = (edge_ids(g1), edge_ids(g2));
    let rv1 = |v: &str| rename(v, v2.contains(v), "a:");
    let rv2 = |v: &str| rename(v, v1.contains(v), "b:");
    let re1 = |e: &str| rename(e, ids2.contains(e), "a:");
    let re2 = |e: &str| rename(e, ids1.contains(e), "b:");

    let mut vertices: Vec<String> = g1.vertices.iter().map(|v| rv1(v)).collect();
    vertices.extend(g2.vertices.iter().map(|v| rv2(v)));

    let mut external = Vec::new();
    for e in g1.external.iter().filter(|e| !used1.contains(e.id.as_str())) {
        external.push(ExternalEdge {
            id: re1(&e.id),
            sign: e.sign,
            at: rv1(&e.at),
        });
    }
    for e in g2.external.iter().filter(|e| !used2.contains(e.id.as_str())) {
        external.push(ExternalEdge {
            id: re2(&e.id),
            sign: e.sign,
            at: rv2(&e.at),
        });
    }

    let mut internal = Vec::new();
    for e in &g1.internal {
        internal.push(InternalEdge {
            id: re1(&e.id),
            sign: e.sign,
            from: rv1(&e.from),
            to: rv1(&e.to),
            length: e.length,
        });
    }
    for e in &g2.internal {
        internal.push(InternalEdge {
            id: re2(&e.id),
            sign: e.sign,
            from: rv2(&e.from),
            to: rv2(&e.to),
            length: e.length,
        });
    }
    let mut new_edges = Vec::new();
    for ((e1, e2), &len) in ident.iter().zip(lengths) {
        let x1 = external_or_err(g1, e1)?;
        let x2 = external_or_err(g2, e2)?;
        let id = format!("{e1}~{e2}");
        if ids1.contains(&id) || ids2.contains(&id) {
            return Err(Error::DuplicateId(id));
        }
        new_edges.push(id.clone());
        internal.push(InternalEdge {
            id,
            sign: x1.sign,
            from: rv1(&x1.at),
            to: rv2(&x2.at),
            length: len,
        });
    }

    let graph = MetricGraph::new(vertices, external, internal)?;
    let idx = graph.boundary_index();
    let (idx1, idx2) = (g1.boundary_index(), g2.boundary_index());

    let glued_pos = |edge: &str, first: bool| -> Option<(String, Endpoint)> {
        let pairs = ident.iter().zip(&new_edges);
        for ((e1, e2), id) in pairs {
            if first && e1 == edge {
                return Some((id.clone(), Endpoint::Origin));
            }
            if !first && e2 == edge {
                return Some((id.clone(), Endpoint::Terminus));
            }
        }
        None
    };
    let map_slots = |old: &BoundaryIndex, first: bool| -> Vec<usize> {
        old.slots
            .iter()
            .map(|s| {
                let key = if s.external {
                    glued_pos(&s.edge, first)
                } else {
                    None
                };
                let (edge, endpoint) = key.unwrap_or_else(|| {
                    let renamed = if first { re1(&s.edge) } else { re2(&s.edge) };
                    (renamed, s.endpoint)
                });
                idx.slot(&edge, endpoint).expect("every old slot has an image")
            })
            .collect()
    };
    let map1 = map_slots(&idx1, true);
    let map2 = map_slots(&idx2, false);
    Ok(GluedGraph {
        graph,
        map1,
        map2,
        new_edges,
    })
}

fn external_or_err<'a>(g: &'a MetricGraph, id: &str) -> Result<&'a ExternalEdge> {
    g.external_edge(id).ok_or_else(|| {
        if g.internal_edge(id).is_some() {
            Error::NotExternal(id.to_string())
        } else {
            Error::UnknownEdge(id.to_string())
        }
    })
}

fn rename(id: &str, collides: bool, prefix: &str) -> String {
    if collides {
        format!("{prefix}{id}")
    } else {
        id.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REAL_LINE: &str = r#"{
        "vertices": ["v"],
        "external": [
            {"id": "e1", "sign": "+", "at": "v"},
            {"id": "e2", "sign": "-", "at": "v"}
        ]
    }"#;

    const TWO_VERTEX: &str = r#"{
        "vertices": ["v1", "v2"],
        "external": [
            {"id": "e1", "sign": "+", "at": "v1"},
            {"id": "e2", "sign": "+", "at": "v2"}
        ],
        "internal": [
            {"id": "i3", "sign": "-", "from": "v1", "to": "v2", "length": 1.0}
        ]
    }"#;

    #[test]
    fn real_line_index() {
        let g = build_graph(REAL_LINE).unwrap();
        let idx = g.boundary_index();
        assert_eq!((idx.n, idx.m), (1, 1));
        assert_eq!(idx.slot("e2", Endpoint::Origin), Some(1));
    }

    #[test]
    fn two_vertex_index() {
        let g = build_graph(TWO_VERTEX).unwrap();
        let idx = g.boundary_index();
        assert_eq!((idx.n, idx.m), (2, 2));
        assert_eq!(idx.internal_slots, vec![(2, 3)]);
        assert_eq!(idx.external_columns(), vec![0, 1]);
    }

    #[test]
    fn compact_index_ordering() {
        let g = MetricGraph::new(
            vec!["u".into(), "w".into()],
            vec![],
            vec![
                InternalEdge {
                    id: "n".into(),
                    sign: Sign::Minus,
                    from: "u".into(),
                    to: "w".into(),
                    length: 0.7,
                },
                InternalEdge {
                    id: "p".into(),
                    sign: Sign::Plus,
                    from: "u".into(),
                    to: "w".into(),
                    length: 1.0,
                },
            ],
        )
        .unwrap();
        let idx = g.boundary_index();
        assert_eq!((idx.n, idx.m), (2, 2));
        assert_eq!(idx.internal_slots, vec![(2, 3), (0, 1)]);
    }

    #[test]
    fn rejects_bad_documents() {
        let zero = TWO_VERTEX.replace("1.0", "0.0");
        assert!(matches!(build_graph(&zero), Err(Error::BadLength { .. })));
        let dangling = REAL_LINE.replace("\"at\": \"v\"}\n        ]", "\"at\": \"q\"}]");
        assert!(matches!(
            build_graph(&dangling),
            Err(Error::DanglingVertex { .. })
        ));
        let dup = REAL_LINE.replace("\"e2\"", "\"e1\"");
        assert!(matches!(build_graph(&dup), Err(Error::DuplicateId(_))));
        assert!(matches!(
            build_graph(r#"{"vertices": ["v"]}"#),
            Err(Error::EmptyGraph)
        ));
        assert!(matches!(build_graph("{"), Err(Error::Document(_))));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let g = build_graph(&TWO_VERTEX.replace("1.0", "0.1234567890123456789")).unwrap();
        let back = build_graph(&g.to_json()).unwrap();
        assert_eq!(g, back);
        assert_eq!(
            g.internal()[0].length.to_bits(),
            back.internal()[0].length.to_bits()
        );
    }

    #[test]
    fn gluing_real_lines_gives_two_vertex_shape() {
        let g = build_graph(REAL_LINE).unwrap();
        let glued = glue_graphs(&g, &g, &[("e2".into(), "e2".into())], &[1.5]).unwrap();
        let h = &glued.graph;
        assert_eq!(h.external().len(), 2);
        assert_eq!(h.internal().len(), 1);
        assert_eq!(h.internal()[0].sign, Sign::Minus);
        assert_eq!(h.internal()[0].from, "a:v");
        assert_eq!(h.internal()[0].to, "b:v");
        let idx = h.boundary_index();
        assert_eq!((idx.n, idx.m), (2, 2));
        assert_eq!(glued.map1, vec![0, 2]);
        assert_eq!(glued.map2, vec![1, 3]);
    }

    #[test]
    fn gluing_errors() {
        let g = build_graph(REAL_LINE).unwrap();
        assert!(matches!(
            glue_graphs(&g, &g, &[("e1".into(), "e2".into())], &[1.0]),
            Err(Error::SignMismatch(..))
        ));
        assert!(matches!(
            glue_graphs(&g, &g, &[("e2".into(), "e2".into())], &[]),
            Err(Error::SizeMismatch(_))
        ));
        let h = build_graph(TWO_VERTEX).unwrap();
        assert!(matches!(
            glue_graphs(&h, &g, &[("i3".into(), "e2".into())], &[1.0]),
            Err(Error::NotExternal(_))
        ));
    }
}
