//! Exact clearing engine for kidney-exchange compatibility graphs.
//!
//! The crate enumerates all capped cycles and chains of a compatibility
//! graph, scores them with failure-aware expected utilities, and solves the
//! clearing problem exactly under four policies: utilitarian,
//! alpha-lexicographic, gamma-weighted, and the hybrid-lexicographic
//! delta-rule. On top of the solver sit price-of-fairness analytics, a
//! blood-type random graph model with non-directed donors and its
//! closed-form price-of-fairness theory, adversarial worst-case instance
//! families, and a deterministic experiment harness that emits CSV reports.

pub mod enumeration;
pub mod fairness;
pub mod harness;
pub mod instance;
pub mod randmodel;
pub mod solver;
pub mod worstcase;

pub use enumeration::{
    enumerate_chains, enumerate_cycles, enumerate_structures, structure_utility, ChainDiscount,
    ClassId, ClearingConfig, EnumerationError, ExchangeStructure, StructureKind, CLASS_HIGH,
    CLASS_LOW,
};
pub use fairness::{
    hybrid_pof_bound, percent_fair, pof, solve_alpha_lex, solve_fair_max, solve_hybrid,
    solve_utilitarian, solve_weighted, u_delta_multi, u_delta_strict, u_delta_two_class,
    ClassSpec, ClearingContext, FairnessError, FairnessRule, HybridMode, PofReport, Region,
};
pub use instance::{
    parse_instance, serialize_instance, CompatibilityGraph, Edge, GraphError, InstanceError,
    Vertex, VertexId, VertexKind, DEFAULT_TAU,
};
pub use randmodel::{
    check_assumptions, classify_regime, lemma_bound_checks, max_pof_over_params, pof_no_ndds,
    sample_graph, BloodType, GridResolution, LemmaReport, ModelError, ModelParams, Regime,
    RegimeResult,
};
pub use solver::{
    brute_force_solve, solve_max, verify_matching, ConstraintSense, Matching, SideConstraint,
    SolveError, SolveOutcome, SolveStatus, VALUE_EPS,
};
pub use worstcase::{
    lex_chain_instance, lex_cycle_instance, long_chain_instance, long_cycle_instance,
    weighted_chain_instance, weighted_cycle_instance, FamilyKind, WorstCaseError, WorstCaseFamily,
};
