//! The four matching policies and their shared solve pipeline.
//!
//! All policies run over the same enumerated structure pool:
//!
//! * utilitarian — maximize total failure-aware utility;
//! * fair-max — utilitarian solve on the fair-reweighted graph (weight 1 into
//!   `V_H`, 0 otherwise), whose objective value is the maximum achievable
//!   highly sensitized score `u_H`;
//! * alpha-lexicographic — maximize total utility subject to
//!   `u_H(M) >= alpha * max_M' u_H(M')`;
//! * gamma-weighted — utilitarian solve with edges into `V_H` scaled by
//!   `1 + gamma`, reported under original weights;
//! * hybrid delta-rule — exact maximization of the piecewise hybrid utility
//!   via region-decomposed solves (see [`hybrid`]).
//!
//! Matchings returned by every policy carry utilities under the original
//! edge weights; the highly sensitized score used by constraints and the
//! `%F` metric always counts expected transplants into `V_H` with unit
//! weights, matching the fair-reweighted objective.

mod hybrid;
mod metrics;

pub use metrics::{
    delta_region, hybrid_pof_bound, percent_fair, pof, u_delta_multi, u_delta_strict,
    u_delta_two_class,
};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::enumeration::{
    enumerate_structures, utility_with, ClassId, ClearingConfig, ConfigError, EnumerationError,
    ExchangeStructure, CLASS_HIGH, CLASS_LOW,
};
use crate::instance::{CompatibilityGraph, VertexId};
use crate::solver::{
    solve_scalar, solve_scalar_seeded, Matching, ScalarConstraint, SolveOutcome, VALUE_EPS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Fair,
    Utilitarian,
    NotApplicable,
}

impl Region {
    pub fn label(&self) -> &'static str {
        match self {
            Region::Fair => "fair",
            Region::Utilitarian => "utilitarian",
            Region::NotApplicable => "na",
        }
    }
}

/// Ordered agent classes for the hybrid rule, most preferred first, with the
/// vertex-to-class assignment. Every pair vertex maps to exactly one class.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassSpec {
    order: Vec<ClassId>,
    membership: BTreeMap<VertexId, ClassId>,
}

impl ClassSpec {
    /// Default two-class split from the graph's sensitization partition,
    /// highly sensitized first.
    pub fn two_class(graph: &CompatibilityGraph) -> Self {
        let mut membership = BTreeMap::new();
        for v in graph.vertices() {
            if v.is_pair() {
                let class = if graph.is_highly_sensitized(v.id) {
                    CLASS_HIGH
                } else {
                    CLASS_LOW
                };
                membership.insert(v.id, class);
            }
        }
        ClassSpec {
            order: vec![CLASS_HIGH, CLASS_LOW],
            membership,
        }
    }

    pub fn new(
        order: Vec<ClassId>,
        membership: BTreeMap<VertexId, ClassId>,
        graph: &CompatibilityGraph,
    ) -> Result<Self, FairnessError> {
        if order.is_empty() {
            return Err(FairnessError::InvalidClassSpec(
                "class order must be nonempty".into(),
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &c in &order {
            if !seen.insert(c) {
                return Err(FairnessError::InvalidClassSpec(format!(
                    "duplicate class {c} in ordering"
                )));
            }
        }
        for v in graph.vertices() {
            if v.is_pair() {
                match membership.get(&v.id) {
                    Some(c) if seen.contains(c) => {}
                    Some(c) => {
                        return Err(FairnessError::InvalidClassSpec(format!(
                            "vertex {} mapped to class {c} missing from the ordering",
                            v.id
                        )))
                    }
                    None => {
                        return Err(FairnessError::InvalidClassSpec(format!(
                            "pair vertex {} has no class",
                            v.id
                        )))
                    }
                }
            }
        }
        Ok(ClassSpec { order, membership })
    }

    pub fn order(&self) -> &[ClassId] {
        &self.order
    }

    pub fn num_classes(&self) -> usize {
        self.order.len()
    }

    pub fn class_of(&self, v: VertexId) -> Option<ClassId> {
        self.membership.get(&v).copied()
    }

    fn position(&self, class: ClassId) -> usize {
        self.order
            .iter()
            .position(|&c| c == class)
            .expect("class missing from ordering")
    }
}

/// Tagged policy with its parameter.
#[derive(Clone, Debug)]
pub enum FairnessRule {
    Utilitarian,
    AlphaLex { alpha: f64 },
    Weighted { gamma: f64 },
    /// `classes: None` means the default two-class split of the graph.
    HybridDelta {
        delta: f64,
        classes: Option<ClassSpec>,
    },
}

impl FairnessRule {
    pub fn validate(&self) -> Result<(), FairnessError> {
        match *self {
            FairnessRule::Utilitarian => Ok(()),
            FairnessRule::AlphaLex { alpha } => {
                if alpha > 0.0 && alpha <= 1.0 {
                    Ok(())
                } else {
                    Err(FairnessError::InvalidAlpha(alpha))
                }
            }
            FairnessRule::Weighted { gamma } => {
                if gamma >= 0.0 {
                    Ok(())
                } else {
                    Err(FairnessError::InvalidGamma(gamma))
                }
            }
            FairnessRule::HybridDelta { delta, .. } => {
                if delta >= 0.0 {
                    Ok(())
                } else {
                    Err(FairnessError::InvalidDelta(delta))
                }
            }
        }
    }
}

/// How the hybrid rule is optimized: exactly by region decomposition, or via
/// the finite grid of alpha-lexicographic candidates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HybridMode {
    #[default]
    Exact,
    Grid,
}

/// Efficiency/fairness report for one solve.
#[derive(Clone, Copy, Debug)]
pub struct PofReport {
    pub u_efficient: f64,
    pub u_fair: f64,
    pub pof: f64,
    pub percent_f: f64,
    pub region: Region,
}

#[derive(Debug, Error)]
pub enum FairnessError {
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("alpha {0} outside (0, 1]")]
    InvalidAlpha(f64),
    #[error("gamma {0} must be nonnegative")]
    InvalidGamma(f64),
    #[error("delta {0} must be nonnegative")]
    InvalidDelta(f64),
    #[error("invalid class specification: {0}")]
    InvalidClassSpec(String),
    #[error("fair utility {u_fair} exceeds efficient utility {u_efficient}; solver bug")]
    FairExceedsEfficient { u_efficient: f64, u_fair: f64 },
    #[error("price-of-fairness bound undefined for zero efficient utility")]
    DegenerateBound,
}

/// Enumerates a graph once and serves every policy solve on that pool.
pub struct ClearingContext {
    graph: CompatibilityGraph,
    config: ClearingConfig,
    structures: Vec<ExchangeStructure>,
    /// Expected transplants into `V_H` per structure under unit weights; the
    /// fair-reweighted objective and the basis of `u_H` scores.
    fair_h: Vec<f64>,
}

impl ClearingContext {
    pub fn new(graph: CompatibilityGraph, config: ClearingConfig) -> Result<Self, FairnessError> {
        config.validate()?;
        let structures = enumerate_structures(&graph, &config)?;
        let fair_h = structures
            .iter()
            .map(|s| {
                utility_with(s.kind, &s.edges, &config, |_| 0, |e| {
                    if graph.is_highly_sensitized(e.dst) {
                        1.0
                    } else {
                        0.0
                    }
                })
                .0
            })
            .collect();
        Ok(ClearingContext {
            graph,
            config,
            structures,
            fair_h,
        })
    }

    pub fn graph(&self) -> &CompatibilityGraph {
        &self.graph
    }

    pub fn config(&self) -> &ClearingConfig {
        &self.config
    }

    pub fn structures(&self) -> &[ExchangeStructure] {
        &self.structures
    }

    fn util_objective(&self) -> Vec<f64> {
        self.structures.iter().map(|s| s.expected_utility).collect()
    }

    /// Highly sensitized score of a selection: expected unit-weight
    /// transplants into `V_H`.
    pub fn fair_score(&self, selected: &[usize]) -> f64 {
        selected.iter().map(|&i| self.fair_h[i]).sum()
    }

    /// The efficient matching `M_E`.
    pub fn utilitarian(&self) -> SolveOutcome {
        solve_scalar(&self.structures, &self.util_objective(), &[], &[])
    }

    /// The fair matching `M_F`: utilitarian solve on the fair-reweighted
    /// graph. Its objective value is `max_M u_H(M)`.
    pub fn fair_max(&self) -> SolveOutcome {
        solve_scalar(&self.structures, &self.fair_h, &[], &[])
    }

    /// Maximize total utility subject to `u_H(M) >= alpha * u_H(M_F)`.
    pub fn alpha_lex(&self, alpha: f64) -> Result<SolveOutcome, FairnessError> {
        FairnessRule::AlphaLex { alpha }.validate()?;
        let fair = self.fair_max();
        let u_h_max = self.fair_score(&fair.selected);
        let constraint = ScalarConstraint {
            contribs: self.fair_h.clone(),
            bound: alpha * u_h_max,
            sense: crate::solver::ConstraintSense::Ge,
        };
        // The fair matching always satisfies the constraint; warm-starting
        // with it gives the constrained search an immediate incumbent.
        Ok(solve_scalar_seeded(
            &self.structures,
            &self.util_objective(),
            &[constraint],
            &[],
            Some(&fair.selected),
        ))
    }

    /// Utilitarian solve under gamma-reweighting; the returned matching is
    /// scored with original weights.
    pub fn weighted(&self, gamma: f64) -> Result<SolveOutcome, FairnessError> {
        FairnessRule::Weighted { gamma }.validate()?;
        // Scaling edges into V_H by (1+gamma) shifts each structure's
        // discounted utility by gamma times its high-class component.
        let objective: Vec<f64> = self
            .structures
            .iter()
            .map(|s| {
                s.expected_utility
                    + gamma * s.utility_by_class.get(&CLASS_HIGH).copied().unwrap_or(0.0)
            })
            .collect();
        Ok(solve_scalar(&self.structures, &objective, &[], &[]))
    }

    /// Exact or grid-based hybrid solve; see [`hybrid`].
    pub fn hybrid(
        &self,
        delta: f64,
        classes: &ClassSpec,
        mode: HybridMode,
    ) -> Result<(SolveOutcome, Region), FairnessError> {
        if delta < 0.0 {
            return Err(FairnessError::InvalidDelta(delta));
        }
        match mode {
            HybridMode::Exact => Ok(hybrid::solve_exact(self, delta, classes)),
            HybridMode::Grid => hybrid::solve_grid(self, delta, classes),
        }
    }

    /// Per-structure class utilities under original weights, dense in the
    /// class ordering of `classes`.
    pub fn class_rows(&self, classes: &ClassSpec) -> Vec<Vec<f64>> {
        let k = classes.num_classes();
        self.structures
            .iter()
            .map(|s| {
                let mut row = vec![0.0; k];
                let (_, by_class) = utility_with(
                    s.kind,
                    &s.edges,
                    &self.config,
                    |v| classes.class_of(v).expect("pair vertex without a class"),
                    |e| e.weight,
                );
                for (class, u) in by_class {
                    row[classes.position(class)] += u;
                }
                row
            })
            .collect()
    }

    /// Recomputes the highly sensitized score of an arbitrary matching (one
    /// not built from this context's pool).
    pub fn matching_fair_score(&self, matching: &Matching) -> f64 {
        matching
            .structures
            .iter()
            .map(|s| {
                utility_with(s.kind, &s.edges, &self.config, |_| 0, |e| {
                    if self.graph.is_highly_sensitized(e.dst) {
                        1.0
                    } else {
                        0.0
                    }
                })
                .0
            })
            .sum()
    }
}

/// Finds the efficient matching `M_E`.
pub fn solve_utilitarian(
    graph: &CompatibilityGraph,
    config: &ClearingConfig,
) -> Result<Matching, FairnessError> {
    Ok(ClearingContext::new(graph.clone(), *config)?
        .utilitarian()
        .matching)
}

/// Finds the fair matching `M_F` (maximum highly sensitized score).
pub fn solve_fair_max(
    graph: &CompatibilityGraph,
    config: &ClearingConfig,
) -> Result<Matching, FairnessError> {
    Ok(ClearingContext::new(graph.clone(), *config)?
        .fair_max()
        .matching)
}

/// Finds the alpha-lexicographic matching `M_alpha`.
pub fn solve_alpha_lex(
    graph: &CompatibilityGraph,
    config: &ClearingConfig,
    alpha: f64,
) -> Result<Matching, FairnessError> {
    Ok(ClearingContext::new(graph.clone(), *config)?
        .alpha_lex(alpha)?
        .matching)
}

/// Finds the gamma-weighted matching `M_gamma`, reported in original weights.
pub fn solve_weighted(
    graph: &CompatibilityGraph,
    config: &ClearingConfig,
    gamma: f64,
) -> Result<Matching, FairnessError> {
    Ok(ClearingContext::new(graph.clone(), *config)?
        .weighted(gamma)?
        .matching)
}

/// Finds the hybrid delta-rule matching `M_delta` and its region.
pub fn solve_hybrid(
    graph: &CompatibilityGraph,
    config: &ClearingConfig,
    delta: f64,
    classes: &ClassSpec,
    mode: HybridMode,
) -> Result<(Matching, Region), FairnessError> {
    let ctx = ClearingContext::new(graph.clone(), *config)?;
    let (outcome, region) = ctx.hybrid(delta, classes, mode)?;
    Ok((outcome.matching, region))
}

/// Tolerance used when comparing candidate utilities across solves.
pub(crate) const TIE_EPS: f64 = VALUE_EPS;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Edge, Vertex};

    /// Theorem-style graph: H in a 2-cycle with V1, plus the L-cycle V1..VL.
    fn lex_cycle_graph(l: usize) -> CompatibilityGraph {
        let mut vertices = vec![Vertex::pair(0, 100.0)];
        vertices.extend((1..=l).map(|i| Vertex::pair(i, 0.0)));
        let mut edges = vec![Edge::new(0, 1, 1.0), Edge::new(1, 0, 1.0)];
        for i in 1..l {
            edges.push(Edge::new(i, i + 1, 1.0));
        }
        edges.push(Edge::new(l, 1, 1.0));
        CompatibilityGraph::build(vertices, edges, 80.0).unwrap()
    }

    #[test]
    fn utilitarian_takes_long_cycle() {
        let g = lex_cycle_graph(4);
        let config = ClearingConfig::new(4, 0, 1.0).unwrap();
        let m = solve_utilitarian(&g, &config).unwrap();
        assert_eq!(m.total_utility, 4.0);
    }

    #[test]
    fn empty_graph_solves_to_empty() {
        let g = CompatibilityGraph::build(vec![], vec![], 80.0).unwrap();
        let config = ClearingConfig::default();
        let m = solve_utilitarian(&g, &config).unwrap();
        assert!(m.structures.is_empty());
        assert_eq!(m.total_utility, 0.0);
    }

    #[test]
    fn fair_max_picks_high_cycle() {
        let g = lex_cycle_graph(4);
        let config = ClearingConfig::new(4, 0, 1.0).unwrap();
        let ctx = ClearingContext::new(g, config).unwrap();
        let fair = ctx.fair_max();
        assert_eq!(ctx.fair_score(&fair.selected), 1.0);
        // the matching is reported in original weights: the 2-cycle scores 2
        assert_eq!(fair.matching.total_utility, 2.0);
        // fair-weight objective of M_F is at least that of M_E
        let efficient = ctx.utilitarian();
        assert!(ctx.fair_score(&fair.selected) >= ctx.fair_score(&efficient.selected));
    }

    #[test]
    fn fair_max_without_high_vertices_scores_zero() {
        let g = CompatibilityGraph::build(
            vec![Vertex::pair(0, 10.0), Vertex::pair(1, 20.0)],
            vec![Edge::new(0, 1, 1.0), Edge::new(1, 0, 1.0)],
            80.0,
        )
        .unwrap();
        let ctx = ClearingContext::new(g, ClearingConfig::default()).unwrap();
        let fair = ctx.fair_max();
        assert_eq!(ctx.fair_score(&fair.selected), 0.0);
    }

    #[test]
    fn alpha_lex_reproduces_theorem_pof() {
        let g = lex_cycle_graph(4);
        let config = ClearingConfig::new(4, 0, 1.0).unwrap();
        for alpha in [0.05, 0.5, 1.0] {
            let m = solve_alpha_lex(&g, &config, alpha).unwrap();
            assert_eq!(m.total_utility, 2.0, "alpha = {alpha}");
            let p = pof(4.0, m.total_utility).unwrap();
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_constraint_soundness() {
        let g = lex_cycle_graph(5);
        let config = ClearingConfig::new(5, 0, 1.0).unwrap();
        let ctx = ClearingContext::new(g, config).unwrap();
        let fair = ctx.fair_max();
        let u_h_max = ctx.fair_score(&fair.selected);
        for alpha in [0.1, 0.3, 0.7, 1.0] {
            let m = ctx.alpha_lex(alpha).unwrap();
            assert!(ctx.fair_score(&m.selected) >= alpha * u_h_max - 1e-9);
        }
    }

    #[test]
    fn weighted_gamma_zero_is_utilitarian() {
        let g = lex_cycle_graph(4);
        let config = ClearingConfig::new(4, 0, 1.0).unwrap();
        let m0 = solve_weighted(&g, &config, 0.0).unwrap();
        let me = solve_utilitarian(&g, &config).unwrap();
        assert_eq!(m0.total_utility, me.total_utility);
    }

    #[test]
    fn weighted_large_gamma_flips_to_two_cycle() {
        // gamma = 3 makes the 2-cycle weigh 2+3=5 over the 4-cycle's 4.
        let g = lex_cycle_graph(4);
        let config = ClearingConfig::new(4, 0, 1.0).unwrap();
        let m = solve_weighted(&g, &config, 3.0).unwrap();
        assert_eq!(m.total_utility, 2.0);
        assert!((pof(4.0, 2.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            solve_weighted(&g, &config, -0.5),
            Err(FairnessError::InvalidGamma(_))
        ));
    }

    #[test]
    fn class_spec_validation() {
        let g = lex_cycle_graph(3);
        let spec = ClassSpec::two_class(&g);
        assert_eq!(spec.num_classes(), 2);
        assert_eq!(spec.class_of(0), Some(CLASS_HIGH));
        assert_eq!(spec.class_of(1), Some(CLASS_LOW));
        // missing membership rejected
        let err = ClassSpec::new(vec![0, 1], BTreeMap::new(), &g);
        assert!(err.is_err());
        // duplicate order rejected
        let err = ClassSpec::new(vec![0, 0], BTreeMap::new(), &g);
        assert!(err.is_err());
    }
}
