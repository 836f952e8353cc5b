//! Shared fixtures and independent oracles for the integration suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fairclear_core::enumeration::{
    enumerate_structures, ChainDiscount, ClearingConfig, ExchangeStructure, StructureKind,
};
use fairclear_core::instance::{CompatibilityGraph, Edge, Vertex};

pub struct OracleInstance {
    pub graph: CompatibilityGraph,
    pub config: ClearingConfig,
    pub structures: Vec<ExchangeStructure>,
}

/// Seeded random graphs small enough for exhaustive oracles: at most 12
/// vertices and at most 25 enumerable structures. Half the instances use
/// unit weights (many ties), the rest draw weights from halves so all
/// utilities stay exactly representable at p in {1, 0.5}.
pub fn oracle_corpus(count: usize) -> Vec<OracleInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xFA1C);
    let mut out = Vec::new();
    let mut attempt = 0u64;
    while out.len() < count {
        attempt += 1;
        assert!(attempt < 100_000, "corpus generation should not stall");
        let nv = rng.gen_range(6..=12usize);
        let mut vertices = Vec::with_capacity(nv);
        for id in 0..nv {
            if rng.gen::<f64>() < 0.15 {
                vertices.push(Vertex::ndd(id));
            } else {
                let cpra = if rng.gen::<f64>() < 0.35 {
                    80.0 + rng.gen_range(0..=20) as f64
                } else {
                    rng.gen_range(0..=79) as f64
                };
                vertices.push(Vertex::pair(id, cpra));
            }
        }
        let unit_weights = out.len() % 2 == 0;
        let mut edges = Vec::new();
        for src in 0..nv {
            for dst in 0..nv {
                if src == dst || !vertices[dst].is_pair() {
                    continue;
                }
                if rng.gen::<f64>() < 0.3 {
                    let weight = if unit_weights {
                        1.0
                    } else {
                        0.5 * rng.gen_range(1..=6) as f64
                    };
                    edges.push(Edge::new(src, dst, weight));
                }
            }
        }
        let graph = match CompatibilityGraph::build(vertices, edges, 80.0) {
            Ok(g) => g,
            Err(_) => continue,
        };
        let p = if out.len() % 3 == 0 { 0.5 } else { 1.0 };
        let config = ClearingConfig::new(3, 3, p).unwrap();
        let structures = enumerate_structures(&graph, &config).unwrap();
        if structures.is_empty() || structures.len() > 25 {
            continue;
        }
        out.push(OracleInstance {
            graph,
            config,
            structures,
        });
    }
    out
}

/// Monte-Carlo estimate of a structure's expected utility under independent
/// edge failures, with the estimate's standard error. Implements both chain
/// semantics directly from the failure process, independently of the
/// closed-form discounting.
pub fn monte_carlo_utility(
    structure: &ExchangeStructure,
    p: f64,
    discount: ChainDiscount,
    trials: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..trials {
        let successes: Vec<bool> = structure.edges.iter().map(|_| rng.gen::<f64>() < p).collect();
        let value = match (structure.kind, discount) {
            (StructureKind::Cycle, _) | (StructureKind::Chain, ChainDiscount::AllOrNothing) => {
                if successes.iter().all(|&s| s) {
                    structure.edges.iter().map(|e| e.weight).sum()
                } else {
                    0.0
                }
            }
            (StructureKind::Chain, ChainDiscount::Prefix) => {
                let mut value = 0.0;
                for (edge, &ok) in structure.edges.iter().zip(&successes) {
                    if !ok {
                        break;
                    }
                    value += edge.weight;
                }
                value
            }
        };
        sum += value;
        sum_sq += value * value;
    }
    let n = trials as f64;
    let mean = sum / n;
    let variance = (sum_sq / n - mean * mean).max(0.0);
    (mean, (variance / n).sqrt())
}

/// Enumerates every vertex-disjoint subset of `structures` (the full
/// matching space) and feeds each selection to `visit`.
pub fn for_each_matching<F: FnMut(&[usize])>(structures: &[ExchangeStructure], mut visit: F) {
    assert!(structures.len() <= 25, "matching space too large");
    let masks: Vec<u64> = structures
        .iter()
        .map(|s| {
            s.vertices
                .iter()
                .fold(0u64, |mask, &v| mask | (1u64 << v))
        })
        .collect();
    fn recurse<F: FnMut(&[usize])>(
        masks: &[u64],
        pos: usize,
        used: u64,
        selection: &mut Vec<usize>,
        visit: &mut F,
    ) {
        if pos == masks.len() {
            visit(selection);
            return;
        }
        if masks[pos] & used == 0 {
            selection.push(pos);
            recurse(masks, pos + 1, used | masks[pos], selection, visit);
            selection.pop();
        }
        recurse(masks, pos + 1, used, selection, visit);
    }
    let mut selection = Vec::new();
    recurse(&masks, 0, 0, &mut selection, &mut visit);
}

/// Class-utility vector (high first, low second) of a selection, from the
/// structures' stored per-class utilities.
pub fn high_low_vector(structures: &[ExchangeStructure], selection: &[usize]) -> [f64; 2] {
    use fairclear_core::enumeration::{CLASS_HIGH, CLASS_LOW};
    let mut u = [0.0, 0.0];
    for &i in selection {
        u[0] += structures[i]
            .utility_by_class
            .get(&CLASS_HIGH)
            .copied()
            .unwrap_or(0.0);
        u[1] += structures[i]
            .utility_by_class
            .get(&CLASS_LOW)
            .copied()
            .unwrap_or(0.0);
    }
    u
}
