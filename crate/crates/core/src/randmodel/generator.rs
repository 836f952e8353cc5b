//! Blood-type random compatibility graph generator.
//!
//! `n` candidate pairs draw independent patient and donor types from `mu`.
//! Blood-type-compatible candidates are tissue-type-incompatible (and hence
//! join the pool) with probability `p_bar`; incompatible candidates always
//! join. Each pooled pair is highly sensitized with probability `1 - lambda`.
//! `floor(beta * pool)` NDDs draw types from `mu`. A directed edge is placed
//! for every blood-compatible donor/patient combination, independently with
//! probability `edge_prob_high` into highly sensitized patients and
//! `edge_prob_low` otherwise. All weights are 1 and the whole construction is
//! a single seeded ChaCha stream, so equal seeds give identical graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ModelError, ModelParams};
use crate::instance::{CompatibilityGraph, Edge, Vertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BloodType {
    O,
    A,
    B,
    Ab,
}

impl BloodType {
    pub const ALL: [BloodType; 4] = [BloodType::O, BloodType::A, BloodType::B, BloodType::Ab];

    pub fn index(self) -> usize {
        match self {
            BloodType::O => 0,
            BloodType::A => 1,
            BloodType::B => 2,
            BloodType::Ab => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BloodType::O => "O",
            BloodType::A => "A",
            BloodType::B => "B",
            BloodType::Ab => "AB",
        }
    }

    /// Standard ABO rules: O donates to anyone, A to {A, AB}, B to {B, AB},
    /// AB only to AB.
    pub fn can_donate_to(self, patient: BloodType) -> bool {
        match self {
            BloodType::O => true,
            BloodType::A => matches!(patient, BloodType::A | BloodType::Ab),
            BloodType::B => matches!(patient, BloodType::B | BloodType::Ab),
            BloodType::Ab => patient == BloodType::Ab,
        }
    }
}

fn sample_type(rng: &mut ChaCha8Rng, mu: &[f64; 4]) -> BloodType {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &fraction) in mu.iter().enumerate() {
        acc += fraction;
        if u < acc {
            return BloodType::ALL[i];
        }
    }
    BloodType::Ab
}

/// Realized draw statistics, for distribution checks without touching edges.
#[derive(Clone, Debug, Default)]
pub struct SampleStats {
    /// Patient blood-type counts over all `n` candidates (before pooling).
    pub candidate_patients: [usize; 4],
    /// Donor blood-type counts over all `n` candidates.
    pub candidate_donors: [usize; 4],
    /// Pool counts per (patient type, donor type) combination.
    pub pool_by_combo: [[usize; 4]; 4],
    pub pool_pairs: usize,
    pub pool_highly: usize,
    pub ndds: usize,
    pub ndd_types: [usize; 4],
}

const HIGH_CPRA: f64 = 95.0;
const LOW_CPRA: f64 = 5.0;
const TAU: f64 = 80.0;

pub(super) fn sample_with_stats(
    params: &ModelParams,
) -> Result<(CompatibilityGraph, SampleStats), ModelError> {
    let violations = super::check_assumptions(params);
    if !violations.is_empty() {
        return Err(ModelError::AssumptionViolation(violations));
    }
    let mu = params.mu_array();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut stats = SampleStats::default();

    // Candidate pairs and pooling.
    let mut pool: Vec<(BloodType, BloodType)> = Vec::new();
    for _ in 0..params.n {
        let patient = sample_type(&mut rng, &mu);
        let donor = sample_type(&mut rng, &mu);
        stats.candidate_patients[patient.index()] += 1;
        stats.candidate_donors[donor.index()] += 1;
        let enters = if donor.can_donate_to(patient) {
            rng.gen::<f64>() < params.p_bar
        } else {
            true
        };
        if enters {
            stats.pool_by_combo[patient.index()][donor.index()] += 1;
            pool.push((patient, donor));
        }
    }
    stats.pool_pairs = pool.len();

    // Sensitization.
    let highly: Vec<bool> = pool
        .iter()
        .map(|_| rng.gen::<f64>() < 1.0 - params.lam)
        .collect();
    stats.pool_highly = highly.iter().filter(|&&h| h).count();

    // NDDs.
    let ndd_count = (params.beta * pool.len() as f64).floor() as usize;
    let ndd_types: Vec<BloodType> = (0..ndd_count).map(|_| sample_type(&mut rng, &mu)).collect();
    stats.ndds = ndd_count;
    for t in &ndd_types {
        stats.ndd_types[t.index()] += 1;
    }

    // Vertices: pool pairs first, then NDDs.
    let m = pool.len();
    let mut vertices: Vec<Vertex> = (0..m)
        .map(|i| Vertex::pair(i, if highly[i] { HIGH_CPRA } else { LOW_CPRA }))
        .collect();
    vertices.extend((m..m + ndd_count).map(Vertex::ndd));

    // Edges: donor of src (pair or NDD) to patient of dst, ABO-gated.
    let donor_type = |v: usize| -> BloodType {
        if v < m {
            pool[v].1
        } else {
            ndd_types[v - m]
        }
    };
    let mut edges = Vec::new();
    for src in 0..m + ndd_count {
        let donor = donor_type(src);
        for (dst, &(patient, _)) in pool.iter().enumerate() {
            if src == dst || !donor.can_donate_to(patient) {
                continue;
            }
            let prob = if highly[dst] {
                params.edge_prob_high
            } else {
                params.edge_prob_low
            };
            if rng.gen::<f64>() < prob {
                edges.push(Edge::new(src, dst, 1.0));
            }
        }
    }

    let graph = CompatibilityGraph::build(vertices, edges, TAU)
        .expect("generated graphs satisfy instance invariants");
    Ok((graph, stats))
}
