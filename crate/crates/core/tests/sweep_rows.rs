//! Row-level guarantees of the sweep harness: every emitted row respects its
//! rule's bound, and the aggregates preserve them.

use fairclear_core::fairness::HybridMode;
use fairclear_core::harness::{aggregate, run_sweep, InstanceSpec, SweepConfig};
use fairclear_core::randmodel::ModelParams;

fn corpus_config() -> SweepConfig {
    SweepConfig {
        instances: vec![
            InstanceSpec::Model {
                model: ModelParams {
                    n: 24,
                    lam: 0.8,
                    beta: 0.1,
                    edge_prob_low: 0.35,
                    edge_prob_high: 0.1,
                    seed: 500,
                    ..ModelParams::default()
                },
                count: 4,
            },
            InstanceSpec::Worstcase {
                family: "lex-cycle".to_string(),
                cap: Some(4),
                n: None,
                gamma: None,
            },
            InstanceSpec::Worstcase {
                family: "lex-chain".to_string(),
                cap: Some(3),
                n: None,
                gamma: None,
            },
        ],
        cycle_cap: 3,
        chain_caps: vec![0, 3],
        edge_probs: vec![0.5, 1.0],
        alphas: vec![0.0, 0.1, 0.5, 1.0],
        gammas: vec![0.0, 2.0, 6.0],
        delta_fracs: vec![0.0, 0.1, 0.3],
        hybrid_mode: HybridMode::Exact,
        seed: 0,
        tau: None,
    }
}

#[test]
fn every_row_respects_its_rule_guarantee() {
    let rows = run_sweep(&corpus_config()).unwrap();
    assert!(rows.iter().all(|r| r.error.is_none()));
    for row in &rows {
        assert!(row.u_fair <= row.u_e + 1e-9, "u_fair above u_e: {row:?}");
        assert!((0.0..=1.0 + 1e-9).contains(&row.pof));
        assert!((0.0..=1.0 + 1e-9).contains(&row.percent_f));
        match row.rule.as_str() {
            "alpha" => {
                let alpha = row.parameter.unwrap();
                assert!(
                    row.percent_f >= alpha - 1e-9,
                    "%F {} below alpha {alpha}",
                    row.percent_f
                );
            }
            "hybrid" => {
                // parameter is delta / u_E, so the bound reads 2 * parameter
                let frac = row.parameter.unwrap();
                assert!(
                    row.pof <= 2.0 * frac + 1e-9,
                    "hybrid PoF {} above 2 * {frac}",
                    row.pof
                );
            }
            "weighted" => {
                if row.parameter == Some(0.0) {
                    assert_eq!(row.pof, 0.0, "gamma = 0 must be efficient");
                }
            }
            "util" => assert_eq!(row.pof, 0.0),
            _ => {}
        }
    }
    // the documented reference point: hybrid at delta = 0.1 u_E stays within 0.2
    assert!(rows
        .iter()
        .filter(|r| r.rule == "hybrid" && r.parameter == Some(0.1))
        .all(|r| r.pof <= 0.2 + 1e-9));
}

#[test]
fn aggregates_preserve_the_guarantees() {
    let rows = run_sweep(&corpus_config()).unwrap();
    let summary = aggregate(&rows);
    assert!(!summary.is_empty());
    for group in &summary {
        match group.rule.as_str() {
            "alpha" => {
                let alpha = group.parameter.unwrap();
                assert!(group.min_percent_f >= alpha - 1e-9);
            }
            "hybrid" => {
                // the max-PoF-vs-parameter curve lies under the slope-two line
                let frac = group.parameter.unwrap();
                assert!(group.max_pof <= 2.0 * frac + 1e-9);
            }
            _ => {}
        }
        assert!(group.rows > 0);
    }
}
