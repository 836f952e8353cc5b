//! Compatibility-graph data model.
//!
//! A kidney exchange is a directed graph over patient-donor pairs and
//! non-directed donors (NDDs). An edge `u -> v` means the donor at `u` can
//! give to the patient at `v`; edges never point at NDDs because NDDs have no
//! patient. Pair vertices carry a CPRA sensitization level, and the graph's
//! threshold `tau` splits pairs into the highly sensitized set `V_H`
//! (`cpra >= tau`) and the lowly sensitized set `V_L`.
//!
//! Graphs are immutable after [`CompatibilityGraph::build`]; the reweighting
//! operations ([`CompatibilityGraph::fair_weights`],
//! [`CompatibilityGraph::gamma_weights`]) return new graphs with identical
//! topology.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense vertex index, `0..|V|`.
pub type VertexId = usize;

/// What a vertex represents: a patient-donor pair or a non-directed donor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VertexKind {
    /// Patient with an incompatible donor; `cpra` is the patient's CPRA in `[0, 100]`.
    Pair { cpra: f64 },
    /// Non-directed donor. Carries no patient, hence no CPRA.
    Ndd,
}

/// A vertex of the compatibility graph.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vertex {
    pub id: VertexId,
    pub kind: VertexKind,
}

impl Vertex {
    pub fn pair(id: VertexId, cpra: f64) -> Self {
        Vertex {
            id,
            kind: VertexKind::Pair { cpra },
        }
    }

    pub fn ndd(id: VertexId) -> Self {
        Vertex {
            id,
            kind: VertexKind::Ndd,
        }
    }

    pub fn is_pair(&self) -> bool {
        matches!(self.kind, VertexKind::Pair { .. })
    }
}

/// A directed edge `src -> dst` with a nonnegative weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
    pub weight: f64,
}

impl Edge {
    pub fn new(src: VertexId, dst: VertexId, weight: f64) -> Self {
        Edge { src, dst, weight }
    }
}

/// Validation errors raised while assembling a graph.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("edge {src}->{dst} references an unknown vertex id")]
    DanglingEdge { src: VertexId, dst: VertexId },
    #[error("edge {src}->{dst} ends at an NDD; NDDs have no patient")]
    EdgeIntoNdd { src: VertexId, dst: VertexId },
    #[error("edge {src}->{dst} has negative weight {weight}")]
    NegativeWeight {
        src: VertexId,
        dst: VertexId,
        weight: f64,
    },
    #[error("edge {src}->{dst} is a self-loop")]
    SelfLoop { src: VertexId, dst: VertexId },
    #[error("duplicate edge {src}->{dst}")]
    DuplicateEdge { src: VertexId, dst: VertexId },
    #[error("vertex id {0} occurs more than once")]
    DuplicateVertexId(VertexId),
    #[error("vertex ids must be dense 0..{expected}, found id {found}")]
    NonDenseIds { expected: usize, found: VertexId },
    #[error("cpra {cpra} of vertex {id} outside [0, 100]")]
    CpraOutOfRange { id: VertexId, cpra: f64 },
    #[error("tau {0} outside [0, 100]")]
    InvalidTau(f64),
    #[error("gamma {0} is negative")]
    NegativeGamma(f64),
}

/// Immutable directed compatibility graph with the derived `V_H`/`V_L` split.
#[derive(Clone, Debug)]
pub struct CompatibilityGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    tau: f64,
    // Outgoing edge indices per vertex, sorted by destination id.
    out_edges: Vec<Vec<usize>>,
    highly: Vec<bool>,
}

impl CompatibilityGraph {
    /// Assembles and validates a graph. Vertices may be given in any order
    /// but their ids must be exactly `0..vertices.len()`.
    pub fn build(
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
        tau: f64,
    ) -> Result<Self, GraphError> {
        if !(0.0..=100.0).contains(&tau) {
            return Err(GraphError::InvalidTau(tau));
        }
        let n = vertices.len();
        let mut slots: Vec<Option<Vertex>> = vec![None; n];
        for v in vertices {
            if v.id >= n {
                return Err(GraphError::NonDenseIds {
                    expected: n,
                    found: v.id,
                });
            }
            if slots[v.id].is_some() {
                return Err(GraphError::DuplicateVertexId(v.id));
            }
            if let VertexKind::Pair { cpra } = v.kind {
                if !(0.0..=100.0).contains(&cpra) {
                    return Err(GraphError::CpraOutOfRange { id: v.id, cpra });
                }
            }
            slots[v.id] = Some(v);
        }
        let vertices: Vec<Vertex> = slots.into_iter().map(|s| s.unwrap()).collect();

        let mut seen = BTreeSet::new();
        for e in &edges {
            if e.src >= n || e.dst >= n {
                return Err(GraphError::DanglingEdge {
                    src: e.src,
                    dst: e.dst,
                });
            }
            if e.src == e.dst {
                return Err(GraphError::SelfLoop {
                    src: e.src,
                    dst: e.dst,
                });
            }
            if !vertices[e.dst].is_pair() {
                return Err(GraphError::EdgeIntoNdd {
                    src: e.src,
                    dst: e.dst,
                });
            }
            if e.weight < 0.0 || !e.weight.is_finite() {
                return Err(GraphError::NegativeWeight {
                    src: e.src,
                    dst: e.dst,
                    weight: e.weight,
                });
            }
            if !seen.insert((e.src, e.dst)) {
                return Err(GraphError::DuplicateEdge {
                    src: e.src,
                    dst: e.dst,
                });
            }
        }

        let mut out_edges = vec![Vec::new(); n];
        let mut indexed: Vec<usize> = (0..edges.len()).collect();
        indexed.sort_by_key(|&i| (edges[i].src, edges[i].dst));
        for i in indexed {
            out_edges[edges[i].src].push(i);
        }

        let highly = vertices
            .iter()
            .map(|v| matches!(v.kind, VertexKind::Pair { cpra } if cpra >= tau))
            .collect();

        Ok(CompatibilityGraph {
            vertices,
            edges,
            tau,
            out_edges,
            highly,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, id: VertexId) -> &Vertex {
        &self.vertices[id]
    }

    pub fn is_pair(&self, id: VertexId) -> bool {
        self.vertices[id].is_pair()
    }

    pub fn is_ndd(&self, id: VertexId) -> bool {
        !self.vertices[id].is_pair()
    }

    /// True iff `id` is a pair with `cpra >= tau`. Boundary `cpra == tau`
    /// counts as highly sensitized.
    pub fn is_highly_sensitized(&self, id: VertexId) -> bool {
        self.highly[id]
    }

    /// Outgoing edges of `id`, sorted by destination id.
    pub fn out_edges(&self, id: VertexId) -> impl Iterator<Item = &Edge> {
        self.out_edges[id].iter().map(move |&i| &self.edges[i])
    }

    /// Indices into [`CompatibilityGraph::edges`] of the outgoing edges of
    /// `id`, sorted by destination id.
    pub fn out_edge_indices(&self, id: VertexId) -> &[usize] {
        &self.out_edges[id]
    }

    pub fn edge(&self, index: usize) -> &Edge {
        &self.edges[index]
    }

    /// True iff the edge `src -> dst` exists.
    pub fn has_edge(&self, src: VertexId, dst: VertexId) -> bool {
        self.edge_weight(src, dst).is_some()
    }

    pub fn edge_weight(&self, src: VertexId, dst: VertexId) -> Option<f64> {
        if src >= self.vertices.len() {
            return None;
        }
        self.out_edges[src]
            .binary_search_by_key(&dst, |&i| self.edges[i].dst)
            .ok()
            .map(|pos| self.edges[self.out_edges[src][pos]].weight)
    }

    /// Splits pair vertices into `(V_H, V_L)`. NDDs appear in neither set.
    pub fn partition(&self) -> (BTreeSet<VertexId>, BTreeSet<VertexId>) {
        let mut high = BTreeSet::new();
        let mut low = BTreeSet::new();
        for v in &self.vertices {
            if v.is_pair() {
                if self.highly[v.id] {
                    high.insert(v.id);
                } else {
                    low.insert(v.id);
                }
            }
        }
        (high, low)
    }

    /// Fair reweighting: weight 1 for edges ending in `V_H`, 0 otherwise.
    /// Idempotent; topology unchanged.
    pub fn fair_weights(&self) -> CompatibilityGraph {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.weight = if g.highly[e.dst] { 1.0 } else { 0.0 };
        }
        g
    }

    /// Weighted-fairness reweighting: edges ending in `V_H` scaled by
    /// `1 + gamma`, all other weights unchanged.
    pub fn gamma_weights(&self, gamma: f64) -> Result<CompatibilityGraph, GraphError> {
        if gamma < 0.0 || !gamma.is_finite() {
            return Err(GraphError::NegativeGamma(gamma));
        }
        let mut g = self.clone();
        for e in &mut g.edges {
            if g.highly[e.dst] {
                e.weight *= 1.0 + gamma;
            }
        }
        Ok(g)
    }

    /// Same vertices and edges under a different sensitization threshold.
    pub fn with_tau(&self, tau: f64) -> Result<CompatibilityGraph, GraphError> {
        CompatibilityGraph::build(self.vertices.clone(), self.edges.clone(), tau)
    }

    /// Structural equality: same vertices, edges (same order), and tau.
    pub fn structurally_equal(&self, other: &CompatibilityGraph) -> bool {
        self.tau == other.tau && self.vertices == other.vertices && self.edges == other.edges
    }
}

/// Default sensitization threshold when an instance file omits `tau`,
/// matching the usual CPRA >= 80 convention for "highly sensitized".
pub const DEFAULT_TAU: f64 = 80.0;

const DEFAULT_EDGE_WEIGHT: f64 = 1.0;

/// Parse/serialization failures, with enough context to locate the problem.
#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed instance: {0}")]
    MalformedInstance(String),
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    vertices: Vec<VertexDoc>,
    edges: Vec<EdgeDoc>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    id: usize,
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    cpra: Option<f64>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    src: usize,
    dst: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
}

/// Parses the instance JSON document. `tau` defaults to [`DEFAULT_TAU`] and
/// edge weights default to 1 when omitted; unknown fields are rejected.
pub fn parse_instance(text: &[u8]) -> Result<CompatibilityGraph, InstanceError> {
    let doc: InstanceDoc = serde_json::from_slice(text)
        .map_err(|e| InstanceError::MalformedInstance(e.to_string()))?;
    let mut vertices = Vec::with_capacity(doc.vertices.len());
    for (i, v) in doc.vertices.iter().enumerate() {
        let kind = match (v.kind.as_str(), v.cpra) {
            ("pair", Some(cpra)) => VertexKind::Pair { cpra },
            ("pair", None) => {
                return Err(InstanceError::MalformedInstance(format!(
                    "vertex {} (entry {}): pair vertices require a cpra field",
                    v.id, i
                )))
            }
            ("ndd", None) => VertexKind::Ndd,
            ("ndd", Some(_)) => {
                return Err(InstanceError::MalformedInstance(format!(
                    "vertex {} (entry {}): ndd vertices carry no cpra",
                    v.id, i
                )))
            }
            (other, _) => {
                return Err(InstanceError::MalformedInstance(format!(
                    "vertex {} (entry {}): unknown kind {:?}",
                    v.id, i, other
                )))
            }
        };
        vertices.push(Vertex { id: v.id, kind });
    }
    let edges = doc
        .edges
        .iter()
        .map(|e| Edge::new(e.src, e.dst, e.weight.unwrap_or(DEFAULT_EDGE_WEIGHT)))
        .collect();
    CompatibilityGraph::build(vertices, edges, doc.tau.unwrap_or(DEFAULT_TAU))
        .map_err(|e| InstanceError::MalformedInstance(e.to_string()))
}

/// Serializes a graph to the instance JSON document. Vertices are emitted in
/// id order and all fields are written explicitly, so output bytes are
/// deterministic and `parse(serialize(g))` reproduces `g`.
pub fn serialize_instance(graph: &CompatibilityGraph) -> Vec<u8> {
    let doc = InstanceDoc {
        tau: Some(graph.tau()),
        vertices: graph
            .vertices()
            .iter()
            .map(|v| match v.kind {
                VertexKind::Pair { cpra } => VertexDoc {
                    id: v.id,
                    kind: "pair".to_string(),
                    cpra: Some(cpra),
                },
                VertexKind::Ndd => VertexDoc {
                    id: v.id,
                    kind: "ndd".to_string(),
                    cpra: None,
                },
            })
            .collect(),
        edges: graph
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                src: e.src,
                dst: e.dst,
                weight: Some(e.weight),
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("instance serialization cannot fail");
    out.push(b'\n');
    out
}
