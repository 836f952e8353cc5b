//! Experiment runner: per-instance policy sweeps, aggregation, CSV reports.
//!
//! A sweep takes a set of instances (files, generator specs, or worst-case
//! fixtures) and, for every `(instance, chain cap, edge probability)` cell,
//! computes the efficient matching, the fair matching, and one matching per
//! policy parameter. Cells run on a bounded worker pool (`FAIRCLEAR_THREADS`
//! caps it) and rows are sorted canonically before emission, so identical
//! configs and seeds produce byte-identical reports regardless of thread
//! count. Per-instance failures (for example the chain-enumeration guard at
//! large caps) become rows with an `error` field and the run continues.
//!
//! The `solve_time` column reports deterministic solver work units
//! (branch-and-bound nodes), not wall-clock time, to keep reruns
//! byte-identical.

mod report;

pub use report::{emit_report, write_rows_csv};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumeration::ClearingConfig;
use crate::fairness::{percent_fair, pof, ClassSpec, ClearingContext, HybridMode, Region};
use crate::instance::{parse_instance, CompatibilityGraph};
use crate::randmodel::ModelParams;
use crate::solver::SolveOutcome;
use crate::worstcase;

/// One instance source in a sweep config.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSpec {
    /// An instance JSON file on disk.
    Path { path: String },
    /// `count` random-model draws; instance `i` uses seed
    /// `model.seed + sweep.seed + i`.
    Model {
        model: ModelParams,
        #[serde(default = "default_count")]
        count: usize,
    },
    /// A worst-case family fixture: `family` is one of `lex-cycle`,
    /// `lex-chain`, `weighted-cycle`, `weighted-chain`, `long-chain`,
    /// `long-cycle`.
    Worstcase {
        family: String,
        #[serde(default)]
        cap: Option<usize>,
        #[serde(default)]
        n: Option<usize>,
        #[serde(default)]
        gamma: Option<f64>,
    },
}

fn default_count() -> usize {
    1
}

fn default_cycle_cap() -> usize {
    3
}

fn tenths() -> Vec<f64> {
    (0..=10).map(|n| n as f64 / 10.0).collect()
}

fn default_alphas() -> Vec<f64> {
    tenths()
}

fn default_gammas() -> Vec<f64> {
    (0..=10).map(|n| 2.0 * n as f64).collect()
}

fn default_delta_fracs() -> Vec<f64> {
    tenths()
}

/// Sweep configuration; the JSON schema of `fairclear sweep --config`.
/// Hybrid deltas are expressed as fractions of the cell's efficient utility.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub instances: Vec<InstanceSpec>,
    #[serde(default = "default_cycle_cap")]
    pub cycle_cap: usize,
    pub chain_caps: Vec<usize>,
    pub edge_probs: Vec<f64>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_gammas")]
    pub gammas: Vec<f64>,
    #[serde(default = "default_delta_fracs")]
    pub delta_fracs: Vec<f64>,
    #[serde(default)]
    pub hybrid_mode: HybridMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tau: Option<f64>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.instances.is_empty() {
            // an empty instance list is allowed and yields an empty report
        }
        if self.chain_caps.is_empty() || self.edge_probs.is_empty() {
            return Err(HarnessError::Config(
                "chain_caps and edge_probs must be nonempty".into(),
            ));
        }
        if self
            .edge_probs
            .iter()
            .any(|p| !(*p > 0.0 && *p <= 1.0))
        {
            return Err(HarnessError::Config(
                "edge_probs must lie in (0, 1]".into(),
            ));
        }
        if self.delta_fracs.iter().any(|d| !(0.0..=1.0).contains(d)) {
            return Err(HarnessError::Config(
                "delta_fracs must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// The corpus the spec-level experiments run on by default: 32 seeded
/// random-model instances (16 each of 32 and 64 candidates) plus one fixture
/// from every worst-case family, swept over the standard parameter grids.
pub fn default_corpus_config(seed: u64) -> SweepConfig {
    let mut instances = Vec::new();
    for (n, base) in [(32usize, 0u64), (64, 1000)] {
        instances.push(InstanceSpec::Model {
            model: ModelParams {
                n,
                lam: 0.85,
                beta: 0.06,
                edge_prob_low: 0.25,
                edge_prob_high: 0.08,
                seed: base,
                ..ModelParams::default()
            },
            count: 16,
        });
    }
    for (family, cap, n, gamma) in [
        ("lex-cycle", Some(4), None, None),
        ("lex-chain", Some(3), None, None),
        ("weighted-cycle", Some(4), None, Some(3.0)),
        ("weighted-chain", Some(3), None, Some(2.0)),
        ("long-chain", None, Some(8), Some(2.0)),
        ("long-cycle", None, Some(8), Some(2.0)),
    ] {
        instances.push(InstanceSpec::Worstcase {
            family: family.to_string(),
            cap,
            n,
            gamma,
        });
    }
    SweepConfig {
        instances,
        cycle_cap: 3,
        chain_caps: vec![0, 3, 10, 20],
        edge_probs: tenths().into_iter().skip(1).collect(),
        alphas: default_alphas(),
        gammas: default_gammas(),
        delta_fracs: default_delta_fracs(),
        hybrid_mode: HybridMode::Exact,
        seed,
        tau: None,
    }
}

/// One emitted result line; `error` is set (and the metric fields are blank
/// in the CSV) when the cell failed.
#[derive(Clone, Debug)]
pub struct ResultRow {
    pub instance: String,
    pub rule: String,
    pub parameter: Option<f64>,
    pub chain_cap: usize,
    pub p: f64,
    pub u_e: f64,
    pub u_fair: f64,
    pub pof: f64,
    pub percent_f: f64,
    pub region: Region,
    pub solve_units: u64,
    pub error: Option<String>,
}

/// Worst-case aggregates per `(rule, parameter, chain_cap, p)` group.
#[derive(Clone, Debug)]
pub struct SummaryRow {
    pub rule: String,
    pub parameter: Option<f64>,
    pub chain_cap: usize,
    pub p: f64,
    pub max_pof: f64,
    pub min_percent_f: f64,
    pub mean_solve_units: f64,
    pub rows: usize,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn build_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var("FAIRCLEAR_THREADS") {
        if let Ok(n) = value.parse::<usize>() {
            if n > 0 {
                builder = builder.num_threads(n);
            }
        }
    }
    builder.build().expect("worker pool")
}

fn build_worstcase(
    family: &str,
    cap: Option<usize>,
    n: Option<usize>,
    gamma: Option<f64>,
) -> Result<(String, CompatibilityGraph), String> {
    let missing = |what: &str| format!("worstcase family {family} requires {what}");
    let built = match family {
        "lex-cycle" => {
            let l = cap.ok_or_else(|| missing("cap"))?;
            worstcase::lex_cycle_instance(l).map(|f| (format!("lex-cycle-L{l}"), f))
        }
        "lex-chain" => {
            let r = cap.ok_or_else(|| missing("cap"))?;
            worstcase::lex_chain_instance(r).map(|f| (format!("lex-chain-R{r}"), f))
        }
        "weighted-cycle" => {
            let l = cap.ok_or_else(|| missing("cap"))?;
            let g = gamma.ok_or_else(|| missing("gamma"))?;
            worstcase::weighted_cycle_instance(l, g)
                .map(|f| (format!("weighted-cycle-L{l}-g{g}"), f))
        }
        "weighted-chain" => {
            let r = cap.ok_or_else(|| missing("cap"))?;
            let g = gamma.ok_or_else(|| missing("gamma"))?;
            worstcase::weighted_chain_instance(r, g)
                .map(|f| (format!("weighted-chain-R{r}-g{g}"), f))
        }
        "long-chain" => {
            let n = n.ok_or_else(|| missing("n"))?;
            let g = gamma.ok_or_else(|| missing("gamma"))?;
            worstcase::long_chain_instance(n, g).map(|f| (format!("long-chain-N{n}-g{g}"), f))
        }
        "long-cycle" => {
            let n = n.ok_or_else(|| missing("n"))?;
            let g = gamma.ok_or_else(|| missing("gamma"))?;
            worstcase::long_cycle_instance(n, g).map(|f| (format!("long-cycle-N{n}-g{g}"), f))
        }
        other => return Err(format!("unknown worstcase family {other:?}")),
    };
    built
        .map(|(id, f)| (id, f.graph))
        .map_err(|e| e.to_string())
}

/// Materialize the instance list; failures become per-instance error stubs.
fn resolve_instances(
    config: &SweepConfig,
) -> Vec<(String, Result<CompatibilityGraph, String>)> {
    let mut out = Vec::new();
    for spec in &config.instances {
        match spec {
            InstanceSpec::Path { path } => {
                let loaded = std::fs::read(path)
                    .map_err(|e| format!("read {path}: {e}"))
                    .and_then(|bytes| {
                        parse_instance(&bytes).map_err(|e| format!("parse {path}: {e}"))
                    });
                let id = std::path::Path::new(path)
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.clone());
                out.push((id, loaded));
            }
            InstanceSpec::Model { model, count } => {
                for i in 0..*count {
                    let mut params = *model;
                    params.seed = model
                        .seed
                        .wrapping_add(config.seed)
                        .wrapping_add(i as u64);
                    let id = format!("model-n{}-seed{}", params.n, params.seed);
                    let graph =
                        crate::randmodel::sample_graph(&params).map_err(|e| e.to_string());
                    out.push((id, graph));
                }
            }
            InstanceSpec::Worstcase {
                family,
                cap,
                n,
                gamma,
            } => match build_worstcase(family, *cap, *n, *gamma) {
                Ok((id, graph)) => out.push((id, Ok(graph))),
                Err(e) => out.push((format!("worstcase-{family}"), Err(e))),
            },
        }
    }
    if let Some(tau) = config.tau {
        for (_, graph) in out.iter_mut() {
            if let Ok(g) = graph {
                match g.with_tau(tau) {
                    Ok(rethresholded) => *g = rethresholded,
                    Err(e) => *graph = Err(e.to_string()),
                }
            }
        }
    }
    out
}

fn error_row(instance: &str, chain_cap: usize, p: f64, message: String) -> ResultRow {
    ResultRow {
        instance: instance.to_string(),
        rule: "error".to_string(),
        parameter: None,
        chain_cap,
        p,
        u_e: 0.0,
        u_fair: 0.0,
        pof: 0.0,
        percent_f: 0.0,
        region: Region::NotApplicable,
        solve_units: 0,
        error: Some(message),
    }
}

struct Cell<'a> {
    instance: &'a str,
    graph: &'a CompatibilityGraph,
    chain_cap: usize,
    p: f64,
}

fn run_cell(cell: &Cell, config: &SweepConfig) -> Vec<ResultRow> {
    let clearing = match ClearingConfig::new(config.cycle_cap, cell.chain_cap, cell.p) {
        Ok(c) => c,
        Err(e) => return vec![error_row(cell.instance, cell.chain_cap, cell.p, e.to_string())],
    };
    let ctx = match ClearingContext::new(cell.graph.clone(), clearing) {
        Ok(ctx) => ctx,
        Err(e) => return vec![error_row(cell.instance, cell.chain_cap, cell.p, e.to_string())],
    };
    let efficient = ctx.utilitarian();
    let u_e = efficient.matching.total_utility;
    let fair = ctx.fair_max();
    let u_h_max = ctx.fair_score(&fair.selected);

    let metric_row = |rule: &str, parameter: Option<f64>, outcome: &SolveOutcome, region: Region| {
        let u_rule = outcome.matching.total_utility;
        match pof(u_e, u_rule) {
            Ok(pof_value) => ResultRow {
                instance: cell.instance.to_string(),
                rule: rule.to_string(),
                parameter,
                chain_cap: cell.chain_cap,
                p: cell.p,
                u_e,
                u_fair: u_rule,
                pof: pof_value,
                percent_f: percent_fair(ctx.fair_score(&outcome.selected), u_h_max)
                    .clamp(0.0, 1.0),
                region,
                solve_units: outcome.nodes_explored,
                error: None,
            },
            Err(e) => error_row(cell.instance, cell.chain_cap, cell.p, e.to_string()),
        }
    };

    let mut rows = Vec::new();
    rows.push(metric_row("util", None, &efficient, Region::NotApplicable));
    rows.push(metric_row("fair", None, &fair, Region::NotApplicable));
    for &alpha in &config.alphas {
        if alpha == 0.0 {
            rows.push(metric_row("alpha", Some(alpha), &efficient, Region::NotApplicable));
            continue;
        }
        rows.push(match ctx.alpha_lex(alpha) {
            Ok(outcome) => metric_row("alpha", Some(alpha), &outcome, Region::NotApplicable),
            Err(e) => error_row(cell.instance, cell.chain_cap, cell.p, e.to_string()),
        });
    }
    for &gamma in &config.gammas {
        rows.push(match ctx.weighted(gamma) {
            Ok(outcome) => metric_row("weighted", Some(gamma), &outcome, Region::NotApplicable),
            Err(e) => error_row(cell.instance, cell.chain_cap, cell.p, e.to_string()),
        });
    }
    let classes = ClassSpec::two_class(ctx.graph());
    for &frac in &config.delta_fracs {
        let delta = frac * u_e;
        rows.push(match ctx.hybrid(delta, &classes, config.hybrid_mode) {
            Ok((outcome, region)) => metric_row("hybrid", Some(frac), &outcome, region),
            Err(e) => error_row(cell.instance, cell.chain_cap, cell.p, e.to_string()),
        });
    }
    rows
}

fn canonical_key(row: &ResultRow) -> (String, String, u64, usize, u64) {
    (
        row.instance.clone(),
        row.rule.clone(),
        row.parameter.map_or(0, f64::to_bits),
        row.chain_cap,
        row.p.to_bits(),
    )
}

/// Runs the sweep and returns rows in canonical order. Deterministic for a
/// fixed config and seed.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<ResultRow>, HarnessError> {
    config.validate()?;
    let instances = resolve_instances(config);
    let mut cells = Vec::new();
    let mut failed_rows = Vec::new();
    for (id, graph) in &instances {
        match graph {
            Ok(graph) => {
                for &chain_cap in &config.chain_caps {
                    for &p in &config.edge_probs {
                        cells.push(Cell {
                            instance: id,
                            graph,
                            chain_cap,
                            p,
                        });
                    }
                }
            }
            Err(message) => {
                for &chain_cap in &config.chain_caps {
                    for &p in &config.edge_probs {
                        failed_rows.push(error_row(id, chain_cap, p, message.clone()));
                    }
                }
            }
        }
    }

    let pool = build_pool();
    let mut rows: Vec<ResultRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| run_cell(cell, config))
            .flatten()
            .collect()
    });
    rows.extend(failed_rows);
    rows.sort_by(|a, b| canonical_key(a).cmp(&canonical_key(b)));
    Ok(rows)
}

/// Worst-case aggregation: max PoF, min %F, mean solver work per group.
pub fn aggregate(rows: &[ResultRow]) -> Vec<SummaryRow> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(String, u64, usize, u64), Vec<&ResultRow>> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.error.is_none()) {
        groups
            .entry((
                row.rule.clone(),
                row.parameter.map_or(0, f64::to_bits),
                row.chain_cap,
                row.p.to_bits(),
            ))
            .or_default()
            .push(row);
    }
    groups
        .into_values()
        .map(|group| {
            let first = group[0];
            let max_pof = group.iter().map(|r| r.pof).fold(f64::NEG_INFINITY, f64::max);
            let min_percent_f = group
                .iter()
                .map(|r| r.percent_f)
                .fold(f64::INFINITY, f64::min);
            let mean_solve_units =
                group.iter().map(|r| r.solve_units as f64).sum::<f64>() / group.len() as f64;
            SummaryRow {
                rule: first.rule.clone(),
                parameter: first.parameter,
                chain_cap: first.chain_cap,
                p: first.p,
                max_pof,
                min_percent_f,
                mean_solve_units,
                rows: group.len(),
            }
        })
        .collect()
}
