//! Enumeration of feasible exchange structures and their failure-aware
//! expected utilities.
//!
//! A structure is either a simple directed cycle over pair vertices (at most
//! `cycle_cap` vertices) or a simple path starting at an NDD (at most
//! `chain_cap` edges). Every edge fails independently with probability
//! `1 - p`. A cycle executes all-or-nothing, so each of its `k` edges
//! contributes `w_e * p^k`. Chains execute sequentially: under the default
//! prefix model the i-th edge contributes `w_e * p^i` (it happens iff the
//! first `i` edges all succeed), while the all-or-nothing switch applies the
//! cycle rule `w_e * p^k` to chains as well.
//!
//! Enumeration is deterministic: cycles are emitted in canonical rotation
//! (minimum vertex id first) ordered by start vertex and depth-first
//! extension over ascending destinations, then chains per NDD in the same
//! order. Re-running enumeration yields the identical list.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::instance::{CompatibilityGraph, Edge, VertexId};

/// Opaque class label used for per-class utility accounting.
pub type ClassId = usize;

/// Default class of highly sensitized pairs (`cpra >= tau`).
pub const CLASS_HIGH: ClassId = 0;
/// Default class of lowly sensitized pairs.
pub const CLASS_LOW: ClassId = 1;

/// How chains are discounted under edge failure.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ChainDiscount {
    /// Edge `i` of a chain contributes `w * p^i`: the chain executes up to
    /// the first failure. This is the default, matching non-simultaneous
    /// chain execution.
    #[default]
    Prefix,
    /// Chains score like cycles: every edge contributes `w * p^k` where `k`
    /// is the chain length.
    AllOrNothing,
}

/// Caps and failure model for one clearing run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClearingConfig {
    /// Maximum cycle size in vertices; 0 disables cycles, 1 is invalid.
    pub cycle_cap: usize,
    /// Maximum chain size in edges (the NDD is not counted); 0 disables chains.
    pub chain_cap: usize,
    /// Edge success probability `p`, in `(0, 1]`.
    pub edge_success_prob: f64,
    pub chain_discount: ChainDiscount,
    /// Guard against out-of-desk-scale instances.
    pub max_chains: usize,
}

pub const DEFAULT_MAX_CHAINS: usize = 10_000_000;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cycle cap must be 0 or >= 2, got 1")]
    InvalidCycleCap,
    #[error("edge success probability {0} outside (0, 1]")]
    EdgeProbOutOfRange(f64),
}

impl ClearingConfig {
    pub fn new(cycle_cap: usize, chain_cap: usize, p: f64) -> Result<Self, ConfigError> {
        let config = ClearingConfig {
            cycle_cap,
            chain_cap,
            edge_success_prob: p,
            chain_discount: ChainDiscount::Prefix,
            max_chains: DEFAULT_MAX_CHAINS,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.cycle_cap == 1 {
            return Err(ConfigError::InvalidCycleCap);
        }
        if !(self.edge_success_prob > 0.0 && self.edge_success_prob <= 1.0) {
            return Err(ConfigError::EdgeProbOutOfRange(self.edge_success_prob));
        }
        Ok(())
    }

    pub fn with_discount(mut self, discount: ChainDiscount) -> Self {
        self.chain_discount = discount;
        self
    }

    pub fn with_max_chains(mut self, limit: usize) -> Self {
        self.max_chains = limit;
        self
    }
}

impl Default for ClearingConfig {
    fn default() -> Self {
        ClearingConfig {
            cycle_cap: 3,
            chain_cap: 3,
            edge_success_prob: 1.0,
            chain_discount: ChainDiscount::Prefix,
            max_chains: DEFAULT_MAX_CHAINS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructureKind {
    Cycle,
    Chain,
}

/// One feasible cycle or chain with cached expected utilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ExchangeStructure {
    pub kind: StructureKind,
    /// Edges in execution order. Cycles start at their minimum vertex.
    pub edges: Vec<Edge>,
    /// Vertices in visit order: cycle vertices, or the NDD followed by the
    /// chain's patients.
    pub vertices: Vec<VertexId>,
    pub expected_utility: f64,
    pub utility_by_class: BTreeMap<ClassId, f64>,
}

impl ExchangeStructure {
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EnumerationError {
    #[error("chain enumeration exceeded the guard of {limit} structures; the instance/cap combination is out of desk scale")]
    ChainExplosion { limit: usize },
}

/// Per-edge discount factor for a structure with `num_edges` edges.
fn edge_discount(
    kind: StructureKind,
    position: usize,
    num_edges: usize,
    config: &ClearingConfig,
) -> f64 {
    let p = config.edge_success_prob;
    match (kind, config.chain_discount) {
        (StructureKind::Cycle, _) | (StructureKind::Chain, ChainDiscount::AllOrNothing) => {
            p.powi(num_edges as i32)
        }
        (StructureKind::Chain, ChainDiscount::Prefix) => p.powi(position as i32 + 1),
    }
}

/// Expected utility of a structure under an arbitrary class assignment and
/// edge-weight override. Returns the total and the per-class split; the total
/// is the sum of the per-class values by construction.
pub fn utility_with<C, W>(
    kind: StructureKind,
    edges: &[Edge],
    config: &ClearingConfig,
    class_of: C,
    weight_of: W,
) -> (f64, BTreeMap<ClassId, f64>)
where
    C: Fn(VertexId) -> ClassId,
    W: Fn(&Edge) -> f64,
{
    let k = edges.len();
    let mut by_class: BTreeMap<ClassId, f64> = BTreeMap::new();
    for (i, e) in edges.iter().enumerate() {
        let contribution = weight_of(e) * edge_discount(kind, i, k, config);
        *by_class.entry(class_of(e.dst)).or_insert(0.0) += contribution;
    }
    let total = by_class.values().sum();
    (total, by_class)
}

/// Recomputes a structure's expected utility under a caller-supplied class
/// assignment, using the structure's stored edge weights.
pub fn structure_utility<C>(
    structure: &ExchangeStructure,
    config: &ClearingConfig,
    class_of: C,
) -> (f64, BTreeMap<ClassId, f64>)
where
    C: Fn(VertexId) -> ClassId,
{
    utility_with(structure.kind, &structure.edges, config, class_of, |e| {
        e.weight
    })
}

/// Default two-class assignment from the graph's sensitization partition.
pub fn default_class_of(graph: &CompatibilityGraph) -> impl Fn(VertexId) -> ClassId + '_ {
    |v| {
        if graph.is_highly_sensitized(v) {
            CLASS_HIGH
        } else {
            CLASS_LOW
        }
    }
}

fn build_structure(
    kind: StructureKind,
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
    graph: &CompatibilityGraph,
    config: &ClearingConfig,
) -> ExchangeStructure {
    let (expected_utility, utility_by_class) =
        utility_with(kind, &edges, config, default_class_of(graph), |e| e.weight);
    ExchangeStructure {
        kind,
        edges,
        vertices,
        expected_utility,
        utility_by_class,
    }
}

/// All simple directed cycles of 2..=`cycle_cap` vertices, each emitted once
/// in canonical rotation (minimum vertex id first), in deterministic order.
pub fn enumerate_cycles(
    graph: &CompatibilityGraph,
    config: &ClearingConfig,
) -> Vec<ExchangeStructure> {
    let cap = config.cycle_cap;
    let mut result = Vec::new();
    if cap < 2 {
        return result;
    }
    let n = graph.num_vertices();
    let mut in_path = vec![false; n];
    for start in 0..n {
        if !graph.is_pair(start) {
            continue;
        }
        // Depth-first over paths whose interior vertices all exceed `start`,
        // so `start` is the canonical minimum of every cycle found.
        let mut path_vertices = vec![start];
        let mut path_edges: Vec<Edge> = Vec::new();
        let mut stack: Vec<(VertexId, usize)> = vec![(start, 0)];
        in_path[start] = true;
        while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
            let outs = graph.out_edge_indices(v);
            if *pos < outs.len() {
                let edge = *graph.edge(outs[*pos]);
                *pos += 1;
                let w = edge.dst;
                if w == start && path_vertices.len() >= 2 {
                    let mut edges = path_edges.clone();
                    edges.push(edge);
                    result.push(build_structure(
                        StructureKind::Cycle,
                        path_vertices.clone(),
                        edges,
                        graph,
                        config,
                    ));
                } else if w > start && !in_path[w] && path_vertices.len() < cap {
                    in_path[w] = true;
                    path_vertices.push(w);
                    path_edges.push(edge);
                    stack.push((w, 0));
                }
            } else {
                stack.pop();
                in_path[v] = false;
                path_vertices.pop();
                path_edges.pop();
            }
        }
        debug_assert!(path_vertices.is_empty());
        in_path[start] = false;
    }
    result
}

/// All simple paths of 1..=`chain_cap` edges starting at an NDD, in
/// deterministic order. Every prefix of a longer chain is itself emitted.
pub fn enumerate_chains(
    graph: &CompatibilityGraph,
    config: &ClearingConfig,
) -> Result<Vec<ExchangeStructure>, EnumerationError> {
    let cap = config.chain_cap;
    let mut result = Vec::new();
    if cap == 0 {
        return Ok(result);
    }
    let n = graph.num_vertices();
    let mut in_path = vec![false; n];
    for ndd in 0..n {
        if !graph.is_ndd(ndd) {
            continue;
        }
        let mut path_vertices = vec![ndd];
        let mut path_edges: Vec<Edge> = Vec::new();
        let mut stack: Vec<(VertexId, usize)> = vec![(ndd, 0)];
        in_path[ndd] = true;
        while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
            let outs = graph.out_edge_indices(v);
            if *pos < outs.len() && path_edges.len() < cap {
                let edge = *graph.edge(outs[*pos]);
                *pos += 1;
                let w = edge.dst;
                if !in_path[w] {
                    in_path[w] = true;
                    path_vertices.push(w);
                    path_edges.push(edge);
                    result.push(build_structure(
                        StructureKind::Chain,
                        path_vertices.clone(),
                        path_edges.clone(),
                        graph,
                        config,
                    ));
                    if result.len() > config.max_chains {
                        return Err(EnumerationError::ChainExplosion {
                            limit: config.max_chains,
                        });
                    }
                    stack.push((w, 0));
                }
            } else {
                stack.pop();
                in_path[v] = false;
                path_vertices.pop();
                path_edges.pop();
            }
        }
        in_path[ndd] = false;
    }
    Ok(result)
}

/// Cycles followed by chains, the candidate pool for one solve.
pub fn enumerate_structures(
    graph: &CompatibilityGraph,
    config: &ClearingConfig,
) -> Result<Vec<ExchangeStructure>, EnumerationError> {
    let mut structures = enumerate_cycles(graph, config);
    structures.extend(enumerate_chains(graph, config)?);
    Ok(structures)
}

/// Re-checks a structure against the graph and caps: edges must exist, the
/// shape must be a simple cycle over pairs or an NDD-rooted simple path, and
/// the relevant cap must hold.
pub fn structure_feasible(
    graph: &CompatibilityGraph,
    config: &ClearingConfig,
    structure: &ExchangeStructure,
) -> bool {
    let edges = &structure.edges;
    if edges.is_empty() {
        return false;
    }
    let n = graph.num_vertices();
    for e in edges {
        if e.src >= n || e.dst >= n || !graph.has_edge(e.src, e.dst) {
            return false;
        }
    }
    // Path-connectivity and vertex-simplicity.
    let mut seen = std::collections::BTreeSet::new();
    for w in edges.windows(2) {
        if w[0].dst != w[1].src {
            return false;
        }
    }
    for e in edges {
        if !seen.insert(e.src) {
            return false;
        }
    }
    match structure.kind {
        StructureKind::Cycle => {
            let k = edges.len();
            k >= 2
                && config.cycle_cap >= k
                && edges.last().unwrap().dst == edges[0].src
                && edges.iter().all(|e| graph.is_pair(e.src))
        }
        StructureKind::Chain => {
            let k = edges.len();
            k >= 1
                && config.chain_cap >= k
                && graph.is_ndd(edges[0].src)
                && !seen.contains(&edges.last().unwrap().dst)
        }
    }
}
