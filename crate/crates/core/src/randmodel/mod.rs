//! Blood-type random graph model and its closed-form price-of-fairness
//! theory.
//!
//! The model draws patient/donor blood types from fractions `mu`, pools
//! blood-compatible candidates with probability `p_bar` (incompatible ones
//! always), marks pooled pairs highly sensitized with probability
//! `1 - lambda`, and adds `beta * |pool|` non-directed donors. Under the
//! standing assumptions (`p_bar > 1 - lambda`, `mu_O > mu_A > mu_B > mu_AB`,
//! `p_bar < 2/5`) the asymptotic efficient matching falls into one of a few
//! regimes indexed by `beta`, each with a closed-form price of fairness:
//!
//! * `LargeBeta` (`beta > (1 - p_bar) mu_AB`): enough NDDs reach every
//!   highly sensitized patient, price of fairness zero;
//! * `SmallBeta` and `MidBeta11`: loss `(1-lambda) mu_O mu_AB / u_E` with a
//!   `u_E` that grows in `beta`;
//! * `MidBeta13` and `MidBeta3`: loss
//!   `((1-mu_AB)((1-p_bar) mu_AB - beta) - lambda mu_AB mu_O) / u_E`.
//!
//! `max_pof_over_params` grid-searches the constrained parameter space at a
//! fixed `beta` (a deterministic lower bound on the true supremum), and
//! `lemma_bound_checks` validates the no-NDD bound `POF_0` and the per-regime
//! `beta` ceilings (1/8, 1/12, 1/8, 1/10) over the same grid.

mod generator;

pub use generator::{BloodType, SampleStats};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::CompatibilityGraph;

/// Blood-type fractions in O, A, B, AB order.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MuFractions {
    #[serde(rename = "O")]
    pub o: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "AB")]
    pub ab: f64,
}

fn default_edge_prob_low() -> f64 {
    0.7
}

fn default_edge_prob_high() -> f64 {
    0.1
}

/// Random-model parameters. `edge_prob_low`/`edge_prob_high` are artifact
/// parameters (the asymptotic model only needs dense constant-probability
/// edges); the defaults make highly sensitized patients hard to match.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub mu: MuFractions,
    pub p_bar: f64,
    pub lam: f64,
    pub beta: f64,
    pub n: usize,
    #[serde(default = "default_edge_prob_low")]
    pub edge_prob_low: f64,
    #[serde(default = "default_edge_prob_high")]
    pub edge_prob_high: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ModelParams {
    pub fn mu_array(&self) -> [f64; 4] {
        [self.mu.o, self.mu.a, self.mu.b, self.mu.ab]
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            mu: MuFractions {
                o: 0.4,
                a: 0.3,
                b: 0.2,
                ab: 0.1,
            },
            p_bar: 0.3,
            lam: 0.9,
            beta: 0.05,
            n: 64,
            edge_prob_low: default_edge_prob_low(),
            edge_prob_high: default_edge_prob_high(),
            seed: 0,
        }
    }
}

/// One standing model assumption, named for violation reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Assumption {
    MuSumsToOne,
    MuOrdering,
    PbarBelowTwoFifths,
    PbarAboveOneMinusLambda,
    ProbabilityRange,
    BetaNonnegative,
}

impl std::fmt::Display for Assumption {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let text = match self {
            Assumption::MuSumsToOne => "sum(mu) = 1",
            Assumption::MuOrdering => "mu_O > mu_A > mu_B > mu_AB > 0",
            Assumption::PbarBelowTwoFifths => "p_bar < 2/5",
            Assumption::PbarAboveOneMinusLambda => "p_bar > 1 - lambda",
            Assumption::ProbabilityRange => "probabilities in [0, 1]",
            Assumption::BetaNonnegative => "beta >= 0",
        };
        f.write_str(text)
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model assumptions violated: {}", .0.iter().map(|a| a.to_string()).collect::<Vec<_>>().join("; "))]
    AssumptionViolation(Vec<Assumption>),
}

/// Returns every violated standing assumption; empty means the parameters
/// are admissible.
pub fn check_assumptions(params: &ModelParams) -> Vec<Assumption> {
    let mut violated = Vec::new();
    let [o, a, b, ab] = params.mu_array();
    if (o + a + b + ab - 1.0).abs() > 1e-9 {
        violated.push(Assumption::MuSumsToOne);
    }
    if !(o > a && a > b && b > ab && ab > 0.0) {
        violated.push(Assumption::MuOrdering);
    }
    if !(params.p_bar < 0.4) {
        violated.push(Assumption::PbarBelowTwoFifths);
    }
    if !(params.p_bar > 1.0 - params.lam) {
        violated.push(Assumption::PbarAboveOneMinusLambda);
    }
    let probs = [
        params.p_bar,
        params.lam,
        params.edge_prob_low,
        params.edge_prob_high,
    ];
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        violated.push(Assumption::ProbabilityRange);
    }
    if params.beta < 0.0 {
        violated.push(Assumption::BetaNonnegative);
    }
    violated
}

/// Samples a compatibility graph from the model. Equal seeds give identical
/// graphs.
pub fn sample_graph(params: &ModelParams) -> Result<CompatibilityGraph, ModelError> {
    generator::sample_with_stats(params).map(|(g, _)| g)
}

/// Like [`sample_graph`] but also returns draw statistics for distribution
/// checks.
pub fn sample_graph_with_stats(
    params: &ModelParams,
) -> Result<(CompatibilityGraph, SampleStats), ModelError> {
    generator::sample_with_stats(params)
}

// Closed-form efficient-matching sizes (per pooled pair, asymptotic).

fn u_e_small_beta(mu: &[f64; 4], p_bar: f64, beta: f64) -> f64 {
    let [o, a, b, ab] = *mu;
    p_bar
        * (2.0 * ab * b
            + 2.0 * ab * a
            + 3.0 * ab * o
            + 2.0 * a * o
            + 2.0 * b * o
            + o * o
            + a * a
            + b * b
            + ab * ab)
        + 2.0 * a * b
        + beta * (a + b + 2.0 * o)
}

fn u_e_mid_beta(mu: &[f64; 4], p_bar: f64, beta: f64) -> f64 {
    let [o, a, b, ab] = *mu;
    ab * b
        + a * (ab + 2.0 * b)
        + beta * o
        + p_bar * (a * a + a * ab + ab * ab + ab * b + b * b + 2.0 * (a + ab + b) * o + o * o)
}

fn pof_a(mu: &[f64; 4], p_bar: f64, lam: f64, beta: f64) -> f64 {
    (1.0 - lam) * mu[0] * mu[3] / u_e_small_beta(mu, p_bar, beta)
}

fn pof_b(mu: &[f64; 4], p_bar: f64, lam: f64, beta: f64) -> f64 {
    let [o, _, _, ab] = *mu;
    ((1.0 - ab) * ((1.0 - p_bar) * ab - beta) - lam * ab * o) / u_e_mid_beta(mu, p_bar, beta)
}

/// Price of fairness of the model without NDDs (`beta = 0`).
pub fn pof_no_ndds(params: &ModelParams) -> Result<f64, ModelError> {
    let violations = check_assumptions(params);
    if !violations.is_empty() {
        return Err(ModelError::AssumptionViolation(violations));
    }
    Ok(pof_a(&params.mu_array(), params.p_bar, params.lam, 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    LargeBeta,
    SmallBeta,
    MidBeta11,
    MidBeta13,
    MidBeta3,
    Unclassified,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::LargeBeta => "large_beta",
            Regime::SmallBeta => "small_beta",
            Regime::MidBeta11 => "mid_beta_11",
            Regime::MidBeta13 => "mid_beta_13",
            Regime::MidBeta3 => "mid_beta_3",
            Regime::Unclassified => "unclassified",
        }
    }

    /// The proved ceiling on `beta` for regimes with nonzero loss.
    pub fn beta_threshold(&self) -> Option<f64> {
        match self {
            Regime::SmallBeta => Some(1.0 / 8.0),
            Regime::MidBeta11 => Some(1.0 / 12.0),
            Regime::MidBeta13 => Some(1.0 / 8.0),
            Regime::MidBeta3 => Some(1.0 / 10.0),
            _ => None,
        }
    }
}

/// Classification outcome: the matched regime with its closed-form values,
/// any lower-precedence regimes whose constraints also hold, and (when
/// unclassified) the violated constraints of every candidate regime.
#[derive(Clone, Debug)]
pub struct RegimeResult {
    pub regime: Regime,
    pub pof: Option<f64>,
    pub u_e: Option<f64>,
    pub overlaps: Vec<Regime>,
    pub violations: Vec<String>,
}

struct RegimeSpec {
    regime: Regime,
    violated: Vec<&'static str>,
}

fn regime_constraints(mu: &[f64; 4], p_bar: f64, lam: f64, beta: f64) -> Vec<RegimeSpec> {
    let [o, a, b, ab] = *mu;
    let q = 1.0 - p_bar;
    let mut specs = Vec::new();

    let mut check = |regime: Regime, constraints: Vec<(&'static str, bool)>| {
        let violated = constraints
            .into_iter()
            .filter_map(|(label, ok)| (!ok).then_some(label))
            .collect();
        specs.push(RegimeSpec { regime, violated });
    };

    check(
        Regime::LargeBeta,
        vec![("large_beta.1: beta > (1-p_bar) mu_AB", beta > q * ab)],
    );
    check(
        Regime::SmallBeta,
        vec![
            (
                "small_beta.1: beta < mu_A (1-p_bar) - p_bar mu_AB",
                beta < a * q - p_bar * ab,
            ),
            (
                "small_beta.2: beta < mu_AB (1-p_bar) - p_bar mu_AB mu_O / mu_A",
                beta < ab * q - p_bar * ab * o / a,
            ),
            (
                "small_beta.3: beta < mu_AB (mu_A / (mu_A + mu_O) - p_bar)",
                beta < ab * (a / (a + o) - p_bar),
            ),
        ],
    );
    check(
        Regime::MidBeta11,
        vec![
            (
                "mid_beta_11.1: beta < mu_AB (1-p_bar) - mu_AB mu_O p_bar / (mu_A + mu_B)",
                beta < ab * q - ab * o * p_bar / (a + b),
            ),
            (
                "mid_beta_11.2: beta < (mu_A mu_AB (1-p_bar) + mu_B mu_O (1-p_bar) - p_bar mu_O mu_AB) / (mu_A + mu_O)",
                beta < (a * ab * q + b * o * q - p_bar * o * ab) / (a + o),
            ),
            (
                "mid_beta_11.3: beta > mu_AB (1-p_bar) - mu_AB mu_O p_bar / mu_A",
                beta > ab * q - ab * o * p_bar / a,
            ),
            (
                "mid_beta_11.4: beta < mu_AB (1-p_bar) - p_bar mu_AB mu_O / mu_A + (1-p_bar) mu_B mu_O / mu_A",
                beta < ab * q - p_bar * ab * o / a + q * b * o / a,
            ),
            (
                "mid_beta_11.5: beta < mu_AB (1-p_bar) - mu_O mu_AB / (1 - mu_AB)",
                beta < ab * q - o * ab / (1.0 - ab),
            ),
        ],
    );
    check(
        Regime::MidBeta13,
        vec![
            (
                "mid_beta_13.1: beta > mu_AB (1-p_bar) - mu_AB mu_O p_bar / mu_A",
                beta > ab * q - ab * o * p_bar / a,
            ),
            (
                "mid_beta_13.2: beta < mu_AB (1-p_bar) - mu_AB mu_O p_bar / (mu_A + mu_B)",
                beta < ab * q - ab * o * p_bar / (a + b),
            ),
            (
                "mid_beta_13.3: beta < mu_AB (1-p_bar) - p_bar mu_AB mu_O / mu_A + (1-p_bar) mu_B mu_O / mu_A",
                beta < ab * q - p_bar * ab * o / a + q * b * o / a,
            ),
            (
                "mid_beta_13.4: beta > mu_AB ((1-p_bar) - mu_O / (1 - mu_AB))",
                beta > ab * (q - o / (1.0 - ab)),
            ),
            (
                "mid_beta_13.5: beta < mu_AB (1-p_bar) - lambda mu_O mu_AB / (1 - mu_AB)",
                beta < ab * q - lam * o * ab / (1.0 - ab),
            ),
        ],
    );
    check(
        Regime::MidBeta3,
        vec![
            (
                "mid_beta_3.1: beta > mu_AB (1-p_bar) - mu_AB mu_O p_bar / (mu_A + mu_B)",
                beta > ab * q - ab * o * p_bar / (a + b),
            ),
            (
                "mid_beta_3.2: beta < mu_AB (1-p_bar) - lambda mu_O mu_AB / (1 - mu_AB)",
                beta < ab * q - lam * o * ab / (1.0 - ab),
            ),
        ],
    );
    specs
}

/// Evaluates every regime's constraint set and returns the highest-precedence
/// match with its closed-form price of fairness, `LargeBeta` first.
pub fn classify_regime(params: &ModelParams) -> Result<RegimeResult, ModelError> {
    let violations = check_assumptions(params);
    if !violations.is_empty() {
        return Err(ModelError::AssumptionViolation(violations));
    }
    let mu = params.mu_array();
    let (p_bar, lam, beta) = (params.p_bar, params.lam, params.beta);
    let specs = regime_constraints(&mu, p_bar, lam, beta);
    let matched: Vec<Regime> = specs
        .iter()
        .filter(|s| s.violated.is_empty())
        .map(|s| s.regime)
        .collect();

    match matched.split_first() {
        Some((&primary, rest)) => {
            let (pof, u_e) = match primary {
                Regime::LargeBeta => (Some(0.0), None),
                Regime::SmallBeta | Regime::MidBeta11 => (
                    Some(pof_a(&mu, p_bar, lam, beta)),
                    Some(u_e_small_beta(&mu, p_bar, beta)),
                ),
                Regime::MidBeta13 | Regime::MidBeta3 => (
                    Some(pof_b(&mu, p_bar, lam, beta)),
                    Some(u_e_mid_beta(&mu, p_bar, beta)),
                ),
                Regime::Unclassified => unreachable!(),
            };
            Ok(RegimeResult {
                regime: primary,
                pof,
                u_e,
                overlaps: rest.to_vec(),
                violations: Vec::new(),
            })
        }
        None => Ok(RegimeResult {
            regime: Regime::Unclassified,
            pof: None,
            u_e: None,
            overlaps: Vec::new(),
            violations: specs
                .iter()
                .flat_map(|s| s.violated.iter().map(|v| v.to_string()))
                .collect(),
        }),
    }
}

/// One admissible parameter point of the search grid (`beta` supplied
/// separately).
#[derive(Clone, Copy, Debug)]
pub struct GridPoint {
    pub mu: [f64; 4],
    pub p_bar: f64,
    pub lam: f64,
}

impl GridPoint {
    pub fn params(&self, beta: f64) -> ModelParams {
        ModelParams {
            mu: MuFractions {
                o: self.mu[0],
                a: self.mu[1],
                b: self.mu[2],
                ab: self.mu[3],
            },
            p_bar: self.p_bar,
            lam: self.lam,
            beta,
            ..ModelParams::default()
        }
    }
}

/// Deterministic grid over the admissible parameter space. The grid also
/// respects `mu_O < 1.5 mu_A`, which the no-NDD bound (and with it the 2/33
/// ceiling) requires.
#[derive(Clone, Debug)]
pub struct GridResolution {
    pub mu_step: f64,
    pub p_bar_values: Vec<f64>,
    /// `lambda = 1 - frac * p_bar` for each fraction; fractions below 1 keep
    /// the `p_bar > 1 - lambda` assumption strict.
    pub lam_fracs: Vec<f64>,
}

impl Default for GridResolution {
    fn default() -> Self {
        GridResolution {
            mu_step: 0.01,
            p_bar_values: vec![0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.39],
            lam_fracs: vec![0.5, 0.9, 0.99],
        }
    }
}

impl GridResolution {
    /// A coarser grid for quick checks.
    pub fn coarse() -> Self {
        GridResolution {
            mu_step: 0.02,
            p_bar_values: vec![0.1, 0.2, 0.3, 0.39],
            lam_fracs: vec![0.5, 0.99],
        }
    }

    pub fn points(&self) -> Vec<GridPoint> {
        let mut points = Vec::new();
        let n = (1.0 / self.mu_step).round() as usize;
        for i_o in 1..n {
            let o = i_o as f64 * self.mu_step;
            if o <= 0.25 || o > 0.55 {
                continue;
            }
            for i_a in 1..n {
                let a = i_a as f64 * self.mu_step;
                if a >= o || o >= 1.5 * a {
                    continue;
                }
                for i_b in 1..n {
                    let b = i_b as f64 * self.mu_step;
                    if b >= a {
                        continue;
                    }
                    let ab = 1.0 - o - a - b;
                    if ab <= 0.0 || ab >= b {
                        continue;
                    }
                    let mu = [o, a, b, ab];
                    for &p_bar in &self.p_bar_values {
                        for &frac in &self.lam_fracs {
                            let lam = 1.0 - frac * p_bar;
                            let point = GridPoint { mu, p_bar, lam };
                            if check_assumptions(&point.params(0.0)).is_empty() {
                                points.push(point);
                            }
                        }
                    }
                }
            }
        }
        points
    }
}

/// Maximum classified price of fairness over the grid at a fixed `beta`.
/// Grid search, so a lower bound on the true supremum; 0 when nothing on the
/// grid classifies.
pub fn max_pof_over_params(beta: f64, resolution: &GridResolution) -> f64 {
    max_pof_details(beta, resolution).0
}

/// Like [`max_pof_over_params`] but also reports the attaining point.
pub fn max_pof_details(
    beta: f64,
    resolution: &GridResolution,
) -> (f64, Option<(GridPoint, Regime)>) {
    let mut best = 0.0;
    let mut arg = None;
    for point in resolution.points() {
        let result = classify_regime(&point.params(beta)).expect("grid points are admissible");
        if let Some(pof) = result.pof {
            if pof > best {
                best = pof;
                arg = Some((point, result.regime));
            }
        }
    }
    (best, arg)
}

/// Outcome of the closed-form bound checks over a grid.
#[derive(Clone, Debug)]
pub struct LemmaReport {
    pub points_checked: usize,
    pub bound_checks: usize,
    pub failures: Vec<String>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn lemma_checks_with<FA, FB>(
    points: &[GridPoint],
    betas: &[f64],
    pof_a_fn: FA,
    pof_b_fn: FB,
) -> LemmaReport
where
    FA: Fn(&GridPoint, f64) -> f64,
    FB: Fn(&GridPoint, f64) -> f64,
{
    let mut report = LemmaReport {
        points_checked: 0,
        bound_checks: 0,
        failures: Vec::new(),
    };
    for point in points {
        for &beta in betas {
            report.points_checked += 1;
            let result =
                classify_regime(&point.params(beta)).expect("grid points are admissible");
            let pof_zero = pof_a(&point.mu, point.p_bar, point.lam, 0.0);
            let value = match result.regime {
                Regime::SmallBeta | Regime::MidBeta11 => Some(pof_a_fn(point, beta)),
                Regime::MidBeta13 | Regime::MidBeta3 => Some(pof_b_fn(point, beta)),
                _ => None,
            };
            if let Some(v) = value {
                report.bound_checks += 1;
                if v > pof_zero + 1e-12 {
                    report.failures.push(format!(
                        "{}: pof {v} exceeds no-NDD bound {pof_zero} at mu={:?} p_bar={} lam={} beta={}",
                        result.regime.label(),
                        point.mu,
                        point.p_bar,
                        point.lam,
                        beta
                    ));
                }
                let threshold = result
                    .regime
                    .beta_threshold()
                    .expect("nonzero regimes have thresholds");
                if beta >= threshold + 1e-12 {
                    report.failures.push(format!(
                        "{}: beta {beta} at or above regime threshold {threshold}",
                        result.regime.label()
                    ));
                }
            }
        }
    }
    report
}

/// Checks `POF_A <= POF_0`, `POF_B <= POF_0`, and the per-regime `beta`
/// ceilings over the grid crossed with `betas`.
pub fn lemma_bound_checks(resolution: &GridResolution, betas: &[f64]) -> LemmaReport {
    let points = resolution.points();
    lemma_checks_with(
        &points,
        betas,
        |p, beta| pof_a(&p.mu, p.p_bar, p.lam, beta),
        |p, beta| pof_b(&p.mu, p.p_bar, p.lam, beta),
    )
}
