//! Exact maximization over vertex-disjoint packings of enumerated structures.
//!
//! `solve_max` runs branch-and-bound over include/exclude decisions in
//! structure-index order. The objective bound at a node is the cheaper of two
//! admissible bounds over the remaining non-conflicting structures: the sum
//! of their positive objective values, and an additive fractional bound that
//! spreads each structure's value over its vertices and charges every free
//! vertex its best per-vertex rate. Linear side constraints over per-class
//! utilities are bounded optimistically during search and decided exactly at
//! leaves.
//!
//! Ties are broken deterministically: among optima (objective within 1e-9),
//! the lexicographically smallest sorted structure-index set wins. The
//! exhaustive `brute_force_solve` applies the identical rule and serves as
//! the solver's independent oracle on small instances.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::enumeration::{structure_feasible, ClassId, ClearingConfig, ExchangeStructure};
use crate::instance::CompatibilityGraph;

/// Comparison slack for objective values and constraint satisfaction.
pub const VALUE_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintSense {
    Ge,
    Le,
}

/// Linear constraint over the per-class utilities of a matching:
/// `sum_c coefficients[c] * u_c(M)  (>=|<=)  bound`.
#[derive(Clone, Debug)]
pub struct SideConstraint {
    pub coefficients: BTreeMap<ClassId, f64>,
    pub bound: f64,
    pub sense: ConstraintSense,
}

impl SideConstraint {
    pub fn ge(coefficients: BTreeMap<ClassId, f64>, bound: f64) -> Self {
        SideConstraint {
            coefficients,
            bound,
            sense: ConstraintSense::Ge,
        }
    }

    pub fn le(coefficients: BTreeMap<ClassId, f64>, bound: f64) -> Self {
        SideConstraint {
            coefficients,
            bound,
            sense: ConstraintSense::Le,
        }
    }
}

/// A vertex-disjoint set of structures with its utility accounting.
#[derive(Clone, Debug, Default)]
pub struct Matching {
    pub structures: Vec<ExchangeStructure>,
    pub utility_vector: BTreeMap<ClassId, f64>,
    pub total_utility: f64,
}

impl Matching {
    pub fn empty() -> Self {
        Matching::default()
    }

    pub fn from_structures(structures: Vec<ExchangeStructure>) -> Self {
        let mut utility_vector: BTreeMap<ClassId, f64> = BTreeMap::new();
        for s in &structures {
            for (&class, &u) in &s.utility_by_class {
                *utility_vector.entry(class).or_insert(0.0) += u;
            }
        }
        let total_utility = utility_vector.values().sum();
        Matching {
            structures,
            utility_vector,
            total_utility,
        }
    }

    pub fn class_utility(&self, class: ClassId) -> f64 {
        self.utility_vector.get(&class).copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub matching: Matching,
    /// Indices into the candidate list, ascending.
    pub selected: Vec<usize>,
    pub status: SolveStatus,
    pub nodes_explored: u64,
}

impl SolveOutcome {
    /// Objective value actually achieved (0 for infeasible outcomes).
    pub fn objective_of(&self, objective: &[f64]) -> f64 {
        self.selected.iter().map(|&i| objective[i]).sum()
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("brute-force oracle limited to {max} structures, got {count}")]
    OracleTooLarge { count: usize, max: usize },
}

pub const ORACLE_MAX_STRUCTURES: usize = 25;

/// Scalar form of a side constraint: per-structure contributions, pre-dotted
/// with the class coefficients.
#[derive(Clone, Debug)]
pub(crate) struct ScalarConstraint {
    pub contribs: Vec<f64>,
    pub bound: f64,
    pub sense: ConstraintSense,
}

impl ScalarConstraint {
    pub(crate) fn from_side(constraint: &SideConstraint, structures: &[ExchangeStructure]) -> Self {
        let contribs = structures
            .iter()
            .map(|s| {
                constraint
                    .coefficients
                    .iter()
                    .map(|(class, coeff)| {
                        coeff * s.utility_by_class.get(class).copied().unwrap_or(0.0)
                    })
                    .sum()
            })
            .collect();
        ScalarConstraint {
            contribs,
            bound: constraint.bound,
            sense: constraint.sense,
        }
    }

    fn satisfied(&self, value: f64) -> bool {
        match self.sense {
            ConstraintSense::Ge => value >= self.bound - VALUE_EPS,
            ConstraintSense::Le => value <= self.bound + VALUE_EPS,
        }
    }
}

type Mask = Vec<u64>;

fn mask_of(structure: &ExchangeStructure, words: usize) -> Mask {
    let mut mask = vec![0u64; words];
    for &v in &structure.vertices {
        mask[v / 64] |= 1u64 << (v % 64);
    }
    mask
}

/// Running per-vertex maxima of objective shares; `frac` is their sum, an
/// admissible bound on any packing of the structures added so far. Any
/// nonnegative per-structure split summing to the objective is admissible;
/// the searcher keeps two complementary splits and the smaller bound wins:
/// uniform over all vertices (tight for cycle-rich pools) and, for chains,
/// everything on the initiating NDD (tight when many chains compete for few
/// NDDs).
struct FracAccumulator {
    dens: Vec<f64>,
    epoch_mark: Vec<u32>,
    epoch: u32,
    frac: f64,
}

impl FracAccumulator {
    fn new(vertex_count: usize) -> Self {
        FracAccumulator {
            dens: vec![0.0; vertex_count],
            epoch_mark: vec![0; vertex_count],
            epoch: 0,
            frac: 0.0,
        }
    }

    fn reset(&mut self) {
        self.epoch += 1;
        self.frac = 0.0;
    }

    fn add(&mut self, vertex: usize, share: f64) {
        if self.epoch_mark[vertex] != self.epoch {
            self.epoch_mark[vertex] = self.epoch;
            self.dens[vertex] = share;
            self.frac += share;
        } else if share > self.dens[vertex] {
            self.frac += share - self.dens[vertex];
            self.dens[vertex] = share;
        }
    }
}

fn intersects(a: &Mask, b: &Mask) -> bool {
    // High words first: NDDs carry the largest ids and are the most common
    // conflict in chain-heavy pools, so this order exits early more often.
    a.iter().rev().zip(b.iter().rev()).any(|(x, y)| x & y != 0)
}

struct Incumbent {
    value: f64,
    selection: Vec<usize>,
}

/// What the searcher learned about the node at `pos`.
enum NodeBound {
    /// A side constraint is unreachable anywhere below this node.
    Infeasible,
    /// Upper bound on the remaining objective, and whether the structure at
    /// `pos` is "uncontested": no remaining compatible structure shares a
    /// vertex with it, so (when its objective strictly helps and it cannot
    /// hurt a constraint) every optimal completion includes it and the
    /// exclude branch can be skipped.
    Branch { bound: f64, uncontested: bool },
}

struct Searcher<'a> {
    masks: &'a [Mask],
    structures: &'a [ExchangeStructure],
    objective: &'a [f64],
    constraints: &'a [ScalarConstraint],
    banned: &'a [Vec<usize>],
    num_structures: usize,
    used: Mask,
    selection: Vec<usize>,
    value: f64,
    cons_values: Vec<f64>,
    best: Option<Incumbent>,
    nodes: u64,
    // Root-state suffix bounds: admissible for any node since conflicts only
    // shrink the candidate set. O(1) per node, and exact while nothing is
    // selected.
    suffix_naive: Vec<f64>,
    suffix_frac: Vec<f64>,
    suffix_cons_opt: Vec<Vec<f64>>,
    // Whether structure i shares no vertex with any structure after it;
    // exact at root state, recomputed in the walk otherwise.
    suffix_uncontested: Vec<bool>,
    // Structures that may be force-included: strictly positive objective and
    // constraint contributions that can only help.
    force_ok: Vec<bool>,
    // fractional-bound accumulators and per-vertex contention counts,
    // versioned to avoid clears between nodes
    frac_uniform: FracAccumulator,
    frac_concentrated: FracAccumulator,
    count: Vec<u8>,
    count_epoch: Vec<u32>,
    epoch: u32,
}

impl<'a> Searcher<'a> {
    fn conflicts(&self, i: usize) -> bool {
        intersects(&self.masks[i], &self.used)
    }

    fn constraint_reachable(&self, c: usize, optimistic_increment: f64) -> bool {
        let constraint = &self.constraints[c];
        let reachable = self.cons_values[c] + optimistic_increment;
        match constraint.sense {
            ConstraintSense::Ge => reachable >= constraint.bound - VALUE_EPS,
            ConstraintSense::Le => reachable <= constraint.bound + VALUE_EPS,
        }
    }

    /// Objective and constraint bounds over remaining compatible structures
    /// in `pos..`, plus contention info for the structure at `pos`.
    fn bounds(&mut self, pos: usize) -> NodeBound {
        let cheap = self.suffix_naive[pos].min(self.suffix_frac[pos]);
        if self.selection.is_empty() {
            // Nothing is used, so the precomputed suffixes are exact.
            for c in 0..self.constraints.len() {
                if !self.constraint_reachable(c, self.suffix_cons_opt[c][pos]) {
                    return NodeBound::Infeasible;
                }
            }
            return NodeBound::Branch {
                bound: cheap,
                uncontested: self.suffix_uncontested[pos],
            };
        }
        if let Some(b) = &self.best {
            if self.value + cheap < b.value - VALUE_EPS {
                // The cheap bound already prunes; skip the exact walk.
                return NodeBound::Branch {
                    bound: cheap,
                    uncontested: false,
                };
            }
        }
        let mut naive = 0.0;
        let mut cons_opt: Vec<f64> = vec![0.0; self.constraints.len()];
        self.epoch += 1;
        self.frac_uniform.reset();
        self.frac_concentrated.reset();
        for i in pos..self.num_structures {
            if self.conflicts(i) {
                continue;
            }
            let vertices = &self.structures[i].vertices;
            for &v in vertices {
                if self.count_epoch[v] != self.epoch {
                    self.count_epoch[v] = self.epoch;
                    self.count[v] = 1;
                } else {
                    self.count[v] = self.count[v].saturating_add(1);
                }
            }
            let obj = self.objective[i];
            if obj > 0.0 {
                naive += obj;
                let (uniform, _) = (obj / vertices.len() as f64, ());
                for &v in vertices {
                    self.frac_uniform.add(v, uniform);
                }
                match self.structures[i].kind {
                    crate::enumeration::StructureKind::Chain => {
                        self.frac_concentrated.add(vertices[0], obj);
                    }
                    crate::enumeration::StructureKind::Cycle => {
                        for &v in vertices {
                            self.frac_concentrated.add(v, uniform);
                        }
                    }
                }
            }
            for (c, constraint) in self.constraints.iter().enumerate() {
                let contrib = constraint.contribs[i];
                match constraint.sense {
                    ConstraintSense::Ge => {
                        if contrib > 0.0 {
                            cons_opt[c] += contrib;
                        }
                    }
                    ConstraintSense::Le => {
                        if contrib < 0.0 {
                            cons_opt[c] += contrib;
                        }
                    }
                }
            }
        }
        for c in 0..self.constraints.len() {
            if !self.constraint_reachable(c, cons_opt[c]) {
                return NodeBound::Infeasible;
            }
        }
        let uncontested = self.structures[pos]
            .vertices
            .iter()
            .all(|&v| self.count_epoch[v] == self.epoch && self.count[v] == 1);
        NodeBound::Branch {
            bound: naive
                .min(self.frac_uniform.frac)
                .min(self.frac_concentrated.frac),
            uncontested,
        }
    }

    fn leaf(&mut self) {
        self.nodes += 1;
        if !self
            .constraints
            .iter()
            .enumerate()
            .all(|(c, constraint)| constraint.satisfied(self.cons_values[c]))
        {
            return;
        }
        if self.banned.iter().any(|b| b == &self.selection) {
            return;
        }
        let better = match &self.best {
            None => true,
            Some(b) => {
                self.value > b.value + VALUE_EPS
                    || (self.value >= b.value - VALUE_EPS && self.selection < b.selection)
            }
        };
        if better {
            self.best = Some(Incumbent {
                value: self.value,
                selection: self.selection.clone(),
            });
        }
    }

    fn include(&mut self, i: usize) {
        for (w, m) in self.used.iter_mut().zip(&self.masks[i]) {
            *w |= m;
        }
        self.selection.push(i);
        self.value += self.objective[i];
        for (c, constraint) in self.constraints.iter().enumerate() {
            self.cons_values[c] += constraint.contribs[i];
        }
    }

    fn exclude(&mut self, i: usize) {
        for (w, m) in self.used.iter_mut().zip(&self.masks[i]) {
            *w &= !m;
        }
        self.selection.pop();
        self.value -= self.objective[i];
        for (c, constraint) in self.constraints.iter().enumerate() {
            self.cons_values[c] -= constraint.contribs[i];
        }
    }

    fn search(&mut self, mut pos: usize) {
        // Structures force-included in this frame; unwound on exit.
        let mut forced: Vec<usize> = Vec::new();
        loop {
            self.nodes += 1;
            while pos < self.num_structures && self.conflicts(pos) {
                pos += 1;
            }
            if pos == self.num_structures {
                self.leaf();
                break;
            }
            let (bound, uncontested) = match self.bounds(pos) {
                NodeBound::Infeasible => break,
                NodeBound::Branch { bound, uncontested } => (bound, uncontested),
            };
            if let Some(b) = &self.best {
                if self.value + bound < b.value - VALUE_EPS {
                    break;
                }
                if self.value + bound <= b.value + VALUE_EPS {
                    // Can at most tie. The selection grows in ascending index
                    // order, so if it is already lexicographically greater
                    // than the incumbent no extension can win the tie-break.
                    if self.selection.as_slice() > b.selection.as_slice() {
                        break;
                    }
                }
            }
            if uncontested && self.force_ok[pos] {
                // Nothing remaining touches this structure and taking it can
                // only help, so every optimal completion contains it: skip
                // the exclude branch entirely.
                self.include(pos);
                forced.push(pos);
                pos += 1;
                continue;
            }
            self.include(pos);
            self.search(pos + 1);
            self.exclude(pos);
            pos += 1;
        }
        for &i in forced.iter().rev() {
            self.exclude(i);
        }
    }
}

fn vertex_universe(structures: &[ExchangeStructure]) -> usize {
    structures
        .iter()
        .flat_map(|s| s.vertices.iter())
        .max()
        .map_or(0, |&v| v + 1)
}

/// Greedy disjoint packing by descending objective, used to seed the search
/// with a strong incumbent when it happens to satisfy the constraints.
fn greedy_seed(
    masks: &[Mask],
    objective: &[f64],
    constraints: &[ScalarConstraint],
    words: usize,
) -> Option<Incumbent> {
    let mut order: Vec<usize> = (0..objective.len()).filter(|&i| objective[i] > 0.0).collect();
    order.sort_by(|&a, &b| {
        objective[b]
            .partial_cmp(&objective[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut used = vec![0u64; words];
    let mut selection = Vec::new();
    let mut value = 0.0;
    let mut cons_values = vec![0.0; constraints.len()];
    for i in order {
        if intersects(&masks[i], &used) {
            continue;
        }
        for (w, m) in used.iter_mut().zip(&masks[i]) {
            *w |= m;
        }
        selection.push(i);
        value += objective[i];
        for (c, constraint) in constraints.iter().enumerate() {
            cons_values[c] += constraint.contribs[i];
        }
    }
    let feasible = constraints
        .iter()
        .enumerate()
        .all(|(c, constraint)| constraint.satisfied(cons_values[c]));
    if feasible {
        selection.sort_unstable();
        Some(Incumbent { value, selection })
    } else {
        None
    }
}

pub(crate) fn solve_scalar(
    structures: &[ExchangeStructure],
    objective: &[f64],
    constraints: &[ScalarConstraint],
    banned: &[Vec<usize>],
) -> SolveOutcome {
    solve_scalar_seeded(structures, objective, constraints, banned, None)
}

/// `warm_start`, when given, must be a vertex-disjoint selection; it becomes
/// the initial incumbent if it satisfies the constraints, which matters for
/// `>=`-constrained solves where the greedy packing is often infeasible.
pub(crate) fn solve_scalar_seeded(
    structures: &[ExchangeStructure],
    objective: &[f64],
    constraints: &[ScalarConstraint],
    banned: &[Vec<usize>],
    warm_start: Option<&[usize]>,
) -> SolveOutcome {
    assert_eq!(structures.len(), objective.len());
    debug_assert!(objective.iter().all(|v| v.is_finite()));
    let vertex_count = vertex_universe(structures);
    let words = vertex_count.div_ceil(64).max(1);
    let masks: Vec<Mask> = structures.iter().map(|s| mask_of(s, words)).collect();

    let acceptable = |inc: &Incumbent| {
        let feasible = constraints.iter().all(|constraint| {
            constraint.satisfied(inc.selection.iter().map(|&i| constraint.contribs[i]).sum())
        });
        feasible && !banned.contains(&inc.selection)
    };
    let mut seed = greedy_seed(&masks, objective, constraints, words).filter(&acceptable);
    if let Some(start) = warm_start {
        let mut selection = start.to_vec();
        selection.sort_unstable();
        let candidate = Incumbent {
            value: selection.iter().map(|&i| objective[i]).sum(),
            selection,
        };
        if acceptable(&candidate) {
            let better = match &seed {
                None => true,
                Some(current) => {
                    candidate.value > current.value + VALUE_EPS
                        || (candidate.value >= current.value - VALUE_EPS
                            && candidate.selection < current.selection)
                }
            };
            if better {
                seed = Some(candidate);
            }
        }
    }

    let num_structures = structures.len();
    let mut suffix_naive = vec![0.0; num_structures + 1];
    let mut suffix_frac = vec![0.0; num_structures + 1];
    let mut suffix_cons_opt = vec![vec![0.0; num_structures + 1]; constraints.len()];
    let mut suffix_uncontested = vec![false; num_structures];
    {
        let mut uniform_acc = FracAccumulator::new(vertex_count);
        let mut concentrated_acc = FracAccumulator::new(vertex_count);
        uniform_acc.reset();
        concentrated_acc.reset();
        let mut touched = vec![false; vertex_count];
        for i in (0..num_structures).rev() {
            suffix_naive[i] = suffix_naive[i + 1] + objective[i].max(0.0);
            suffix_uncontested[i] = structures[i].vertices.iter().all(|&v| !touched[v]);
            for &v in &structures[i].vertices {
                touched[v] = true;
            }
            if objective[i] > 0.0 {
                let rate = objective[i] / structures[i].vertices.len() as f64;
                for &v in &structures[i].vertices {
                    uniform_acc.add(v, rate);
                }
                match structures[i].kind {
                    crate::enumeration::StructureKind::Chain => {
                        concentrated_acc.add(structures[i].vertices[0], objective[i]);
                    }
                    crate::enumeration::StructureKind::Cycle => {
                        for &v in &structures[i].vertices {
                            concentrated_acc.add(v, rate);
                        }
                    }
                }
            }
            suffix_frac[i] = uniform_acc.frac.min(concentrated_acc.frac);
            for (c, constraint) in constraints.iter().enumerate() {
                let contrib = constraint.contribs[i];
                let optimistic = match constraint.sense {
                    ConstraintSense::Ge => contrib.max(0.0),
                    ConstraintSense::Le => contrib.min(0.0),
                };
                suffix_cons_opt[c][i] = suffix_cons_opt[c][i + 1] + optimistic;
            }
        }
    }
    // A structure may be force-included only if selecting it strictly
    // improves the objective and cannot push any constraint the wrong way.
    // Banned selections void the optimality argument entirely.
    let force_ok: Vec<bool> = (0..num_structures)
        .map(|i| {
            banned.is_empty()
                && objective[i] > VALUE_EPS
                && constraints.iter().all(|c| match c.sense {
                    ConstraintSense::Ge => c.contribs[i] >= 0.0,
                    ConstraintSense::Le => c.contribs[i] <= 0.0,
                })
        })
        .collect();

    let mut searcher = Searcher {
        masks: &masks,
        structures,
        objective,
        constraints,
        banned,
        num_structures,
        used: vec![0u64; words],
        selection: Vec::new(),
        value: 0.0,
        cons_values: vec![0.0; constraints.len()],
        best: seed,
        nodes: 0,
        suffix_naive,
        suffix_frac,
        suffix_cons_opt,
        suffix_uncontested,
        force_ok,
        frac_uniform: FracAccumulator::new(vertex_count),
        frac_concentrated: FracAccumulator::new(vertex_count),
        count: vec![0; vertex_count],
        count_epoch: vec![0; vertex_count],
        epoch: 0,
    };
    searcher.search(0);

    match searcher.best {
        Some(incumbent) => {
            let matching = Matching::from_structures(
                incumbent
                    .selection
                    .iter()
                    .map(|&i| structures[i].clone())
                    .collect(),
            );
            SolveOutcome {
                matching,
                selected: incumbent.selection,
                status: SolveStatus::Optimal,
                nodes_explored: searcher.nodes,
            }
        }
        None => SolveOutcome {
            matching: Matching::empty(),
            selected: Vec::new(),
            status: SolveStatus::Infeasible,
            nodes_explored: searcher.nodes,
        },
    }
}

/// Exact maximum of `objective` over vertex-disjoint, constraint-satisfying
/// packings. Infeasibility is reported via the outcome status and is only
/// possible when a `>=` constraint rules out the empty matching.
pub fn solve_max(
    structures: &[ExchangeStructure],
    objective: &[f64],
    constraints: &[SideConstraint],
) -> SolveOutcome {
    let scalar: Vec<ScalarConstraint> = constraints
        .iter()
        .map(|c| ScalarConstraint::from_side(c, structures))
        .collect();
    solve_scalar(structures, objective, &scalar, &[])
}

/// Exhaustive oracle: backtracks over every disjoint subset, applying the
/// same constraint check and tie-break as `solve_max`. Guarded to small
/// candidate pools.
pub fn brute_force_solve(
    structures: &[ExchangeStructure],
    objective: &[f64],
    constraints: &[SideConstraint],
) -> Result<SolveOutcome, SolveError> {
    if structures.len() > ORACLE_MAX_STRUCTURES {
        return Err(SolveError::OracleTooLarge {
            count: structures.len(),
            max: ORACLE_MAX_STRUCTURES,
        });
    }
    let scalar: Vec<ScalarConstraint> = constraints
        .iter()
        .map(|c| ScalarConstraint::from_side(c, structures))
        .collect();
    let vertex_count = vertex_universe(structures);
    let words = vertex_count.div_ceil(64).max(1);
    let masks: Vec<Mask> = structures.iter().map(|s| mask_of(s, words)).collect();

    struct Brute<'a> {
        masks: &'a [Mask],
        objective: &'a [f64],
        constraints: &'a [ScalarConstraint],
        used: Mask,
        selection: Vec<usize>,
        value: f64,
        cons_values: Vec<f64>,
        best: Option<Incumbent>,
        nodes: u64,
    }

    impl Brute<'_> {
        fn visit(&mut self, pos: usize) {
            self.nodes += 1;
            if pos == self.masks.len() {
                let ok = self
                    .constraints
                    .iter()
                    .enumerate()
                    .all(|(c, constraint)| constraint.satisfied(self.cons_values[c]));
                if !ok {
                    return;
                }
                let better = match &self.best {
                    None => true,
                    Some(b) => {
                        self.value > b.value + VALUE_EPS
                            || (self.value >= b.value - VALUE_EPS
                                && self.selection < b.selection)
                    }
                };
                if better {
                    self.best = Some(Incumbent {
                        value: self.value,
                        selection: self.selection.clone(),
                    });
                }
                return;
            }
            if !intersects(&self.masks[pos], &self.used) {
                for (w, m) in self.used.iter_mut().zip(&self.masks[pos]) {
                    *w |= m;
                }
                self.selection.push(pos);
                self.value += self.objective[pos];
                for (c, constraint) in self.constraints.iter().enumerate() {
                    self.cons_values[c] += constraint.contribs[pos];
                }
                self.visit(pos + 1);
                for (w, m) in self.used.iter_mut().zip(&self.masks[pos]) {
                    *w &= !m;
                }
                self.selection.pop();
                self.value -= self.objective[pos];
                for (c, constraint) in self.constraints.iter().enumerate() {
                    self.cons_values[c] -= constraint.contribs[pos];
                }
            }
            self.visit(pos + 1);
        }
    }

    let mut brute = Brute {
        masks: &masks,
        objective,
        constraints: &scalar,
        used: vec![0u64; words],
        selection: Vec::new(),
        value: 0.0,
        cons_values: vec![0.0; scalar.len()],
        best: None,
        nodes: 0,
    };
    brute.visit(0);

    Ok(match brute.best {
        Some(incumbent) => {
            let matching = Matching::from_structures(
                incumbent
                    .selection
                    .iter()
                    .map(|&i| structures[i].clone())
                    .collect(),
            );
            SolveOutcome {
                matching,
                selected: incumbent.selection,
                status: SolveStatus::Optimal,
                nodes_explored: brute.nodes,
            }
        }
        None => SolveOutcome {
            matching: Matching::empty(),
            selected: Vec::new(),
            status: SolveStatus::Infeasible,
            nodes_explored: brute.nodes,
        },
    })
}

/// True iff all structures are feasible in the graph, respect the caps, and
/// are pairwise vertex-disjoint.
pub fn verify_matching(
    graph: &CompatibilityGraph,
    config: &ClearingConfig,
    matching: &Matching,
) -> bool {
    let mut used = std::collections::BTreeSet::new();
    for s in &matching.structures {
        if !structure_feasible(graph, config, s) {
            return false;
        }
        for &v in &s.vertices {
            if !used.insert(v) {
                return false;
            }
        }
    }
    true
}
