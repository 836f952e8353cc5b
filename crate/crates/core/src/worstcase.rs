//! Adversarial instance families with known price of fairness.
//!
//! Each constructor builds a compatibility graph on which a specific policy
//! provably loses a known fraction of the efficient utility, together with
//! the run configuration that realizes the loss. `measured_pof` re-derives
//! the price of fairness by running the full pipeline (enumerate, solve the
//! policy, compare against the efficient matching), so every family is a
//! machine-checked witness.
//!
//! Sensitization is fixed at CPRA 100 for the disadvantaged vertices and 0
//! for the rest, with threshold 80; any values straddling the threshold
//! would do, these keep the fixtures deterministic.

use thiserror::Error;

use crate::enumeration::ClearingConfig;
use crate::fairness::{self, pof, FairnessError, FairnessRule};
use crate::instance::{CompatibilityGraph, Edge, GraphError, Vertex};

const HIGH_CPRA: f64 = 100.0;
const LOW_CPRA: f64 = 0.0;
const TAU: f64 = 80.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FamilyKind {
    /// One highly sensitized pair in a 2-cycle, beside an L-cycle of others.
    LexCycle { l: usize },
    /// An NDD feeding either one highly sensitized pair or an R-path.
    LexChain { r: usize },
    /// Same graph as `LexCycle` under the weighted rule.
    WeightedCycle { l: usize, gamma: f64 },
    /// Same graph as `LexChain` under the weighted rule.
    WeightedChain { r: usize, gamma: f64 },
    /// Uncapped chains: one NDD heading a highly sensitized path of length n
    /// and a longer ordinary path.
    LongChain { n: usize, gamma: f64 },
    /// Cycle variant of `LongChain` with the NDD replaced by a pair.
    LongCycle { n: usize, gamma: f64 },
}

/// A constructed family member: the graph, the run that certifies it, and
/// the price of fairness it is expected to realize.
#[derive(Clone, Debug)]
pub struct WorstCaseFamily {
    pub kind: FamilyKind,
    pub graph: CompatibilityGraph,
    pub expected_pof: f64,
    pub config: ClearingConfig,
    pub rule: FairnessRule,
}

#[derive(Debug, Error)]
pub enum WorstCaseError {
    #[error("cycle/chain cap {cap} too small for this family (minimum {min})")]
    CapTooSmall { cap: usize, min: usize },
    #[error("gamma {gamma} below the family threshold {min}")]
    GammaTooSmall { gamma: f64, min: f64 },
    #[error("path length {n} too small (minimum {min})")]
    PathTooShort { n: usize, min: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Fairness(#[from] FairnessError),
}

/// H (id 0) in a 2-cycle with V1, plus the directed cycle V1..VL.
fn lex_cycle_graph(l: usize) -> Result<CompatibilityGraph, GraphError> {
    let mut vertices = vec![Vertex::pair(0, HIGH_CPRA)];
    vertices.extend((1..=l).map(|i| Vertex::pair(i, LOW_CPRA)));
    let mut edges = vec![Edge::new(0, 1, 1.0), Edge::new(1, 0, 1.0)];
    for i in 1..l {
        edges.push(Edge::new(i, i + 1, 1.0));
    }
    edges.push(Edge::new(l, 1, 1.0));
    CompatibilityGraph::build(vertices, edges, TAU)
}

/// H (id 0), the R-path 1..=r, and the NDD (id r+1) that feeds both.
fn lex_chain_graph(r: usize) -> Result<CompatibilityGraph, GraphError> {
    let ndd = r + 1;
    let mut vertices = vec![Vertex::pair(0, HIGH_CPRA)];
    vertices.extend((1..=r).map(|i| Vertex::pair(i, LOW_CPRA)));
    vertices.push(Vertex::ndd(ndd));
    let mut edges = vec![Edge::new(ndd, 0, 1.0), Edge::new(ndd, 1, 1.0)];
    for i in 1..r {
        edges.push(Edge::new(i, i + 1, 1.0));
    }
    CompatibilityGraph::build(vertices, edges, TAU)
}

/// Strict lexicographic fairness loses (L-2)/L on the cycle family.
pub fn lex_cycle_instance(l: usize) -> Result<WorstCaseFamily, WorstCaseError> {
    if l < 3 {
        return Err(WorstCaseError::CapTooSmall { cap: l, min: 3 });
    }
    Ok(WorstCaseFamily {
        kind: FamilyKind::LexCycle { l },
        graph: lex_cycle_graph(l)?,
        expected_pof: (l as f64 - 2.0) / l as f64,
        config: ClearingConfig::new(l, 0, 1.0).expect("valid caps"),
        rule: FairnessRule::AlphaLex { alpha: 1.0 },
    })
}

/// Strict lexicographic fairness loses (R-1)/R on the chain family.
pub fn lex_chain_instance(r: usize) -> Result<WorstCaseFamily, WorstCaseError> {
    if r < 2 {
        return Err(WorstCaseError::CapTooSmall { cap: r, min: 2 });
    }
    Ok(WorstCaseFamily {
        kind: FamilyKind::LexChain { r },
        graph: lex_chain_graph(r)?,
        expected_pof: (r as f64 - 1.0) / r as f64,
        config: ClearingConfig::new(0, r, 1.0).expect("valid caps"),
        rule: FairnessRule::AlphaLex { alpha: 1.0 },
    })
}

/// The weighted rule with gamma >= L-1 realizes the same loss as the
/// lexicographic cycle family. The statement threshold L-1 is required even
/// though gamma > L-2 already flips the solve; at gamma = L-2 exactly the
/// reweighted utilities tie.
pub fn weighted_cycle_instance(l: usize, gamma: f64) -> Result<WorstCaseFamily, WorstCaseError> {
    if l < 3 {
        return Err(WorstCaseError::CapTooSmall { cap: l, min: 3 });
    }
    let min = l as f64 - 1.0;
    if gamma < min {
        return Err(WorstCaseError::GammaTooSmall { gamma, min });
    }
    Ok(WorstCaseFamily {
        kind: FamilyKind::WeightedCycle { l, gamma },
        graph: lex_cycle_graph(l)?,
        expected_pof: (l as f64 - 2.0) / l as f64,
        config: ClearingConfig::new(l, 0, 1.0).expect("valid caps"),
        rule: FairnessRule::Weighted { gamma },
    })
}

/// The weighted rule with gamma >= R-1 on the chain family. At the threshold
/// itself the 1-chain and the R-chain tie in reweighted utility; the
/// deterministic tie-break selects the 1-chain, realizing the bound.
pub fn weighted_chain_instance(r: usize, gamma: f64) -> Result<WorstCaseFamily, WorstCaseError> {
    if r < 2 {
        return Err(WorstCaseError::CapTooSmall { cap: r, min: 2 });
    }
    let min = r as f64 - 1.0;
    if gamma < min {
        return Err(WorstCaseError::GammaTooSmall { gamma, min });
    }
    Ok(WorstCaseFamily {
        kind: FamilyKind::WeightedChain { r, gamma },
        graph: lex_chain_graph(r)?,
        expected_pof: (r as f64 - 1.0) / r as f64,
        config: ClearingConfig::new(0, r, 1.0).expect("valid caps"),
        rule: FairnessRule::Weighted { gamma },
    })
}

/// floor(gamma * n), shared by both uncapped families.
fn floor_gamma_n(n: usize, gamma: f64) -> f64 {
    (gamma * n as f64).floor()
}

/// Uncapped chain family: highly sensitized path of length n and an ordinary
/// path of length floor((gamma+1) n) - 1 off a single shared NDD. Only one
/// chain can be selected, which is what the construction hinges on.
pub fn long_chain_instance(n: usize, gamma: f64) -> Result<WorstCaseFamily, WorstCaseError> {
    if n < 2 {
        return Err(WorstCaseError::PathTooShort { n, min: 2 });
    }
    if gamma <= 0.0 {
        return Err(WorstCaseError::GammaTooSmall { gamma, min: f64::MIN_POSITIVE });
    }
    let gn = floor_gamma_n(n, gamma);
    let n_prime = (n as i64 + gn as i64 - 1).max(1) as usize;
    // ids: H path 0..n-1, V path n..n+n_prime-1, NDD last
    let ndd = n + n_prime;
    let mut vertices: Vec<Vertex> = (0..n).map(|i| Vertex::pair(i, HIGH_CPRA)).collect();
    vertices.extend((n..n + n_prime).map(|i| Vertex::pair(i, LOW_CPRA)));
    vertices.push(Vertex::ndd(ndd));
    let mut edges = vec![Edge::new(ndd, 0, 1.0), Edge::new(ndd, n, 1.0)];
    for i in 0..n - 1 {
        edges.push(Edge::new(i, i + 1, 1.0));
    }
    for i in n..n + n_prime - 1 {
        edges.push(Edge::new(i, i + 1, 1.0));
    }
    let graph = CompatibilityGraph::build(vertices, edges, TAU)?;
    // Both chains must start at the one NDD so they conflict.
    assert!(
        graph.has_edge(ndd, 0) && graph.has_edge(ndd, n),
        "both paths must hang off the shared NDD"
    );
    let expected_pof = ((gn - 1.0) / (gn + n as f64 - 1.0)).max(0.0);
    Ok(WorstCaseFamily {
        kind: FamilyKind::LongChain { n, gamma },
        graph,
        expected_pof,
        config: ClearingConfig::new(0, n + n_prime, 1.0).expect("valid caps"),
        rule: FairnessRule::Weighted { gamma },
    })
}

/// Cycle variant: the NDD becomes a highly sensitized pair H0 and both path
/// ends close back into it, forming two conflicting cycles.
pub fn long_cycle_instance(n: usize, gamma: f64) -> Result<WorstCaseFamily, WorstCaseError> {
    if n < 2 {
        return Err(WorstCaseError::PathTooShort { n, min: 2 });
    }
    if gamma <= 0.0 {
        return Err(WorstCaseError::GammaTooSmall { gamma, min: f64::MIN_POSITIVE });
    }
    let gn = floor_gamma_n(n, gamma);
    let n_prime = (n as i64 + gn as i64 - 1).max(1) as usize;
    // ids: H0 = 0, H path 1..=n, V path n+1..n+n_prime
    let mut vertices = vec![Vertex::pair(0, HIGH_CPRA)];
    vertices.extend((1..=n).map(|i| Vertex::pair(i, HIGH_CPRA)));
    vertices.extend((n + 1..=n + n_prime).map(|i| Vertex::pair(i, LOW_CPRA)));
    let mut edges = vec![Edge::new(0, 1, 1.0), Edge::new(0, n + 1, 1.0)];
    for i in 1..n {
        edges.push(Edge::new(i, i + 1, 1.0));
    }
    edges.push(Edge::new(n, 0, 1.0));
    for i in n + 1..n + n_prime {
        edges.push(Edge::new(i, i + 1, 1.0));
    }
    edges.push(Edge::new(n + n_prime, 0, 1.0));
    let graph = CompatibilityGraph::build(vertices, edges, TAU)?;
    let expected_pof = ((gn - 1.0) / (gn + n as f64)).max(0.0);
    Ok(WorstCaseFamily {
        kind: FamilyKind::LongCycle { n, gamma },
        graph,
        expected_pof,
        config: ClearingConfig::new(n + n_prime + 1, 0, 1.0).expect("valid caps"),
        rule: FairnessRule::Weighted { gamma },
    })
}

/// Runs the full pipeline on a family member and returns the realized price
/// of fairness of its policy against the efficient matching.
pub fn measured_pof(family: &WorstCaseFamily) -> Result<f64, WorstCaseError> {
    let ctx = fairness::ClearingContext::new(family.graph.clone(), family.config)?;
    let efficient = ctx.utilitarian();
    let fair_total = match family.rule {
        FairnessRule::AlphaLex { alpha } => ctx.alpha_lex(alpha)?.matching.total_utility,
        FairnessRule::Weighted { gamma } => ctx.weighted(gamma)?.matching.total_utility,
        FairnessRule::Utilitarian => efficient.matching.total_utility,
        FairnessRule::HybridDelta { delta, ref classes } => {
            let spec = classes
                .clone()
                .unwrap_or_else(|| fairness::ClassSpec::two_class(ctx.graph()));
            ctx.hybrid(delta, &spec, fairness::HybridMode::Exact)?
                .0
                .matching
                .total_utility
        }
    };
    Ok(pof(efficient.matching.total_utility, fair_total)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lex_cycle_pofs() {
        for l in [3usize, 4, 5, 6, 100] {
            let family = lex_cycle_instance(l).unwrap();
            let expected = (l as f64 - 2.0) / l as f64;
            assert_eq!(family.expected_pof, expected);
            let measured = measured_pof(&family).unwrap();
            assert!(
                (measured - expected).abs() < 1e-9,
                "L={l}: measured {measured} expected {expected}"
            );
        }
        assert!(matches!(
            lex_cycle_instance(2),
            Err(WorstCaseError::CapTooSmall { .. })
        ));
    }

    #[test]
    fn lex_chain_pofs() {
        for r in [2usize, 3, 4, 5, 6, 20] {
            let family = lex_chain_instance(r).unwrap();
            let expected = (r as f64 - 1.0) / r as f64;
            let measured = measured_pof(&family).unwrap();
            assert!(
                (measured - expected).abs() < 1e-9,
                "R={r}: measured {measured} expected {expected}"
            );
        }
        assert!(matches!(
            lex_chain_instance(1),
            Err(WorstCaseError::CapTooSmall { .. })
        ));
    }

    #[test]
    fn weighted_families_match_lex_pofs() {
        for l in [3usize, 4, 6] {
            let family = weighted_cycle_instance(l, l as f64 - 1.0).unwrap();
            let measured = measured_pof(&family).unwrap();
            assert!((measured - family.expected_pof).abs() < 1e-9, "L={l}");
        }
        for r in [2usize, 3, 5] {
            // the theorem threshold itself must realize the bound (tie case)
            let family = weighted_chain_instance(r, r as f64 - 1.0).unwrap();
            let measured = measured_pof(&family).unwrap();
            assert!((measured - family.expected_pof).abs() < 1e-9, "R={r}");
            // and so must a strictly larger gamma
            let family = weighted_chain_instance(r, r as f64 - 0.5).unwrap();
            assert!((measured_pof(&family).unwrap() - family.expected_pof).abs() < 1e-9);
        }
        assert!(matches!(
            weighted_cycle_instance(4, 1.0),
            Err(WorstCaseError::GammaTooSmall { .. })
        ));
    }

    #[test]
    fn long_chain_small_cases() {
        // N=2, gamma=1: floor formula gives (2-1)/(2+2-1) = 1/3, solver-verified.
        let family = long_chain_instance(2, 1.0).unwrap();
        assert!((family.expected_pof - 1.0 / 3.0).abs() < 1e-12);
        let measured = measured_pof(&family).unwrap();
        assert!((measured - family.expected_pof).abs() < 1e-9);
    }

    #[test]
    fn long_cycle_small_cases() {
        let family = long_cycle_instance(2, 1.0).unwrap();
        // gn=2: (2-1)/(2+2) = 1/4
        assert!((family.expected_pof - 0.25).abs() < 1e-12);
        let measured = measured_pof(&family).unwrap();
        assert!((measured - family.expected_pof).abs() < 1e-9);
    }

    #[test]
    fn tiny_gamma_gives_zero_pof() {
        // gamma*n < 1: the highly sensitized chain is itself efficient.
        let family = long_chain_instance(3, 0.1).unwrap();
        assert_eq!(family.expected_pof, 0.0);
        assert!((measured_pof(&family).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn fair_side_matches_fewer_transplants_when_pof_positive() {
        for family in [
            lex_cycle_instance(4).unwrap(),
            lex_chain_instance(3).unwrap(),
            weighted_cycle_instance(4, 3.0).unwrap(),
            long_chain_instance(4, 2.0).unwrap(),
        ] {
            if family.expected_pof > 0.0 {
                let ctx =
                    fairness::ClearingContext::new(family.graph.clone(), family.config).unwrap();
                let efficient = ctx.utilitarian().matching.total_utility;
                let fair = match family.rule {
                    FairnessRule::AlphaLex { alpha } => ctx.alpha_lex(alpha).unwrap(),
                    FairnessRule::Weighted { gamma } => ctx.weighted(gamma).unwrap(),
                    _ => unreachable!(),
                };
                assert!(fair.matching.total_utility < efficient);
            }
        }
    }
}
