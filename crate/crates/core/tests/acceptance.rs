//! Acceptance suite: every exit criterion runs at its stated tolerance and
//! prints one pass line (the harness prints the failures). Criterion 12,
//! byte-identical sweep reruns, lives in the CLI crate next to the binary it
//! exercises.

mod common;

use std::time::Instant;

use common::{for_each_matching, high_low_vector, monte_carlo_utility, oracle_corpus};

use fairclear_core::enumeration::{
    structure_utility, ChainDiscount, ClearingConfig, CLASS_HIGH, CLASS_LOW,
};
use fairclear_core::fairness::{
    delta_region, pof, u_delta_multi, u_delta_two_class, ClassSpec, ClearingContext, HybridMode,
    Region,
};
use fairclear_core::randmodel::{
    lemma_bound_checks, max_pof_over_params, GridResolution, ModelParams,
};
use fairclear_core::solver::{brute_force_solve, solve_max, SideConstraint, SolveStatus};
use fairclear_core::worstcase;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-9;

fn pass(criterion: &str, start: Instant, detail: &str) {
    println!(
        "ACCEPTANCE {criterion} PASS ({} ms): {detail}",
        start.elapsed().as_millis()
    );
}

#[test]
fn acceptance_01_lex_cycle_family_exact() {
    let start = Instant::now();
    for l in [3usize, 4, 5, 6] {
        let family = worstcase::lex_cycle_instance(l).unwrap();
        let expected = (l as f64 - 2.0) / l as f64;
        assert!((family.expected_pof - expected).abs() <= EPS);
        let measured = worstcase::measured_pof(&family).unwrap();
        assert!(
            (measured - expected).abs() <= EPS,
            "L={l}: measured {measured}, expected {expected}"
        );
    }
    assert!(start.elapsed().as_secs_f64() < 1.0, "must finish within 1 s");
    pass("01", start, "lex cycle family PoF = (L-2)/L for L in 3..=6");
}

#[test]
fn acceptance_02_lex_chain_family_exact() {
    let start = Instant::now();
    for r in [2usize, 3, 4, 5, 6] {
        let family = worstcase::lex_chain_instance(r).unwrap();
        let expected = (r as f64 - 1.0) / r as f64;
        let measured = worstcase::measured_pof(&family).unwrap();
        assert!(
            (measured - expected).abs() <= EPS,
            "R={r}: measured {measured}, expected {expected}"
        );
    }
    assert!(start.elapsed().as_secs_f64() < 1.0, "must finish within 1 s");
    pass("02", start, "lex chain family PoF = (R-1)/R for R in 2..=6");
}

#[test]
fn acceptance_03_weighted_families_exact() {
    let start = Instant::now();
    for l in [3usize, 4, 5, 6] {
        for epsilon in [0.0, 0.25, 1.0] {
            let gamma = l as f64 - 1.0 + epsilon;
            let family = worstcase::weighted_cycle_instance(l, gamma).unwrap();
            let expected = (l as f64 - 2.0) / l as f64;
            let measured = worstcase::measured_pof(&family).unwrap();
            assert!(
                (measured - expected).abs() <= EPS,
                "L={l} gamma={gamma}: measured {measured}, expected {expected}"
            );
        }
    }
    for r in [2usize, 3, 4, 5, 6] {
        for epsilon in [0.0, 0.25, 1.0] {
            let gamma = r as f64 - 1.0 + epsilon;
            let family = worstcase::weighted_chain_instance(r, gamma).unwrap();
            let expected = (r as f64 - 1.0) / r as f64;
            let measured = worstcase::measured_pof(&family).unwrap();
            assert!(
                (measured - expected).abs() <= EPS,
                "R={r} gamma={gamma}: measured {measured}, expected {expected}"
            );
        }
    }
    pass("03", start, "weighted families reproduce the lex PoFs at gamma >= cap-1");
}

#[test]
fn acceptance_04_uncapped_families_approach_gamma_ratio() {
    let start = Instant::now();
    let chain = worstcase::long_chain_instance(1000, 2.0).unwrap();
    // floor formula: (2000 - 1) / (2000 + 1000 - 1)
    assert!((chain.expected_pof - 1999.0 / 2999.0).abs() <= EPS);
    assert!((chain.expected_pof - 2.0 / 3.0).abs() < 1e-2);
    let measured = worstcase::measured_pof(&chain).unwrap();
    assert!((measured - chain.expected_pof).abs() <= EPS);

    let cycle = worstcase::long_cycle_instance(1000, 2.0).unwrap();
    assert!((cycle.expected_pof - 1999.0 / 3000.0).abs() <= EPS);
    assert!((cycle.expected_pof - 2.0 / 3.0).abs() < 1e-2);
    let measured = worstcase::measured_pof(&cycle).unwrap();
    assert!((measured - cycle.expected_pof).abs() <= EPS);

    assert!(start.elapsed().as_secs_f64() < 10.0, "must finish within 10 s");
    pass("04", start, "uncapped chain/cycle families match the floor formula near gamma/(gamma+1)");
}

/// The random corpus shared by the hybrid-bound and alpha-guarantee checks:
/// 200 model draws with at most 40 candidates, caps (3, 4), p in {0.5, 1}.
fn bound_corpus() -> Vec<(ClearingContext, f64)> {
    let mut out = Vec::new();
    for i in 0..200u64 {
        let n = [24, 32, 40][(i % 3) as usize];
        let params = ModelParams {
            n,
            lam: 0.8,
            beta: 0.1,
            edge_prob_low: 0.35,
            edge_prob_high: 0.1,
            seed: 9000 + i,
            ..ModelParams::default()
        };
        let graph = fairclear_core::randmodel::sample_graph(&params).unwrap();
        let p = if i % 2 == 0 { 1.0 } else { 0.5 };
        let config = ClearingConfig::new(3, 4, p).unwrap();
        let ctx = ClearingContext::new(graph, config).unwrap();
        out.push((ctx, p));
    }
    out
}

#[test]
fn acceptance_05_hybrid_bound_on_random_corpus() {
    let start = Instant::now();
    let mut solves = 0usize;
    for (ctx, _) in bound_corpus() {
        let classes = ClassSpec::two_class(ctx.graph());
        let u_e = ctx.utilitarian().matching.total_utility;
        for frac in [0.1, 0.2, 0.3, 0.4, 0.5] {
            let delta = frac * u_e;
            let (outcome, _) = ctx.hybrid(delta, &classes, HybridMode::Exact).unwrap();
            let p = pof(u_e, outcome.matching.total_utility).unwrap();
            let bound = if u_e > 0.0 { 2.0 * delta / u_e } else { 0.0 };
            assert!(
                p <= bound + EPS,
                "hybrid PoF {p} above bound {bound} (delta {delta}, u_e {u_e})"
            );
            solves += 1;
        }
    }
    assert_eq!(solves, 1000);
    assert!(start.elapsed().as_secs_f64() < 300.0, "must finish within 5 min");
    pass("05", start, "1000 hybrid solves stay within PoF <= 2 delta / u_E");
}

#[test]
fn acceptance_06_alpha_guarantee_on_random_corpus() {
    let start = Instant::now();
    for (ctx, _) in bound_corpus() {
        let fair = ctx.fair_max();
        let u_h_max = ctx.fair_score(&fair.selected);
        for alpha in [0.1, 0.3, 0.5, 0.7, 0.9, 1.0] {
            let outcome = ctx.alpha_lex(alpha).unwrap();
            let u_h = ctx.fair_score(&outcome.selected);
            assert!(
                u_h >= alpha * u_h_max - EPS,
                "u_H {u_h} below alpha {alpha} * {u_h_max}"
            );
            let percent_f = if u_h_max == 0.0 { 1.0 } else { u_h / u_h_max };
            assert!(percent_f >= alpha - EPS);
        }
    }
    pass("06", start, "alpha-lex keeps u_H >= alpha u_H(M_F) and %F >= alpha");
}

#[test]
fn acceptance_07_solver_matches_exhaustive_oracle() {
    let start = Instant::now();
    let corpus = oracle_corpus(100);
    for (i, instance) in corpus.iter().enumerate() {
        let objective: Vec<f64> = instance
            .structures
            .iter()
            .map(|s| s.expected_utility)
            .collect();
        let h_objective: Vec<f64> = instance
            .structures
            .iter()
            .map(|s| s.utility_by_class.get(&CLASS_HIGH).copied().unwrap_or(0.0))
            .collect();
        let best_h = brute_force_solve(&instance.structures, &h_objective, &[])
            .unwrap()
            .objective_of(&h_objective);
        let unconstrained = brute_force_solve(&instance.structures, &objective, &[]).unwrap();
        let u_l_opt = unconstrained.matching.class_utility(CLASS_LOW);

        let scenarios: Vec<Vec<SideConstraint>> = vec![
            vec![],
            vec![SideConstraint::ge(
                [(CLASS_HIGH, 1.0)].into(),
                0.5 * best_h,
            )],
            vec![
                SideConstraint::ge([(CLASS_HIGH, 1.0)].into(), 0.25 * best_h),
                SideConstraint::le([(CLASS_LOW, 1.0)].into(), 0.6 * u_l_opt),
            ],
        ];
        for (s, constraints) in scenarios.iter().enumerate() {
            let fast = solve_max(&instance.structures, &objective, constraints);
            let slow = brute_force_solve(&instance.structures, &objective, constraints).unwrap();
            assert_eq!(
                fast.status, slow.status,
                "instance {i} scenario {s}: status mismatch"
            );
            if fast.status == SolveStatus::Optimal {
                let fv = fast.objective_of(&objective);
                let sv = slow.objective_of(&objective);
                assert!(
                    (fv - sv).abs() <= EPS,
                    "instance {i} scenario {s}: value {fv} vs oracle {sv}"
                );
                assert_eq!(
                    fast.selected, slow.selected,
                    "instance {i} scenario {s}: tie-broken selection differs"
                );
            }
        }
    }
    assert!(start.elapsed().as_secs_f64() < 60.0, "must finish within 1 min");
    pass("07", start, "solve_max equals the exhaustive oracle on 100 instances x 3 constraint scenarios");
}

#[test]
fn acceptance_08_hybrid_matches_exhaustive_oracle() {
    let start = Instant::now();
    let corpus = oracle_corpus(100);
    for (i, instance) in corpus.iter().enumerate() {
        let ctx = ClearingContext::new(instance.graph.clone(), instance.config).unwrap();
        let classes = ClassSpec::two_class(ctx.graph());
        for delta in [0.0, 0.5, 1.0, 2.0, 4.0] {
            // Exhaustive reference: best hybrid value over every matching,
            // then the fair-preferred lexicographic refinement.
            let mut best = f64::NEG_INFINITY;
            for_each_matching(&instance.structures, |selection| {
                let u = high_low_vector(&instance.structures, selection);
                best = best.max(u_delta_multi(&u, delta));
            });
            let mut fair_refined: Option<[f64; 2]> = None;
            let mut any_fair = false;
            for_each_matching(&instance.structures, |selection| {
                let u = high_low_vector(&instance.structures, selection);
                if u_delta_multi(&u, delta) >= best - EPS
                    && delta_region(&u, delta) == Region::Fair
                {
                    any_fair = true;
                    let better = match fair_refined {
                        None => true,
                        Some(cur) => {
                            u[0] > cur[0] + EPS
                                || (u[0] >= cur[0] - EPS && u[1] > cur[1] + EPS)
                        }
                    };
                    if better {
                        fair_refined = Some(u);
                    }
                }
            });

            let (outcome, region) = ctx.hybrid(delta, &classes, HybridMode::Exact).unwrap();
            let u = [
                outcome.matching.class_utility(CLASS_HIGH),
                outcome.matching.class_utility(CLASS_LOW),
            ];
            let value = u_delta_multi(&u, delta);
            assert!(
                (value - best).abs() <= EPS,
                "instance {i} delta {delta}: solver value {value} vs oracle {best}"
            );
            let oracle_region = if any_fair { Region::Fair } else { Region::Utilitarian };
            assert_eq!(region, oracle_region, "instance {i} delta {delta}");
            if let (Region::Fair, Some(reference)) = (region, fair_refined) {
                assert!(
                    (u[0] - reference[0]).abs() <= EPS && (u[1] - reference[1]).abs() <= EPS,
                    "instance {i} delta {delta}: refinement ({}, {}) vs oracle ({}, {})",
                    u[0],
                    u[1],
                    reference[0],
                    reference[1]
                );
            }
        }
    }
    pass("08", start, "hybrid solve matches the exhaustive maximum and fair-region refinement");
}

#[test]
fn acceptance_09_model_theory_bounds() {
    let start = Instant::now();
    let resolution = GridResolution::default();

    let at_zero = max_pof_over_params(0.0, &resolution);
    assert!(
        at_zero <= 2.0 / 33.0 + EPS,
        "beta=0 maximum {at_zero} above 2/33"
    );
    assert!(at_zero >= 0.05, "beta=0 maximum {at_zero} below 0.05");

    let mut previous = f64::INFINITY;
    for beta in [0.0, 0.025, 0.05, 0.075, 0.1, 0.125] {
        let value = max_pof_over_params(beta, &resolution);
        assert!(
            value <= previous + EPS,
            "maximum not non-increasing at beta {beta}: {value} after {previous}"
        );
        previous = value;
    }
    for beta in [0.13, 0.15, 0.2] {
        assert_eq!(max_pof_over_params(beta, &resolution), 0.0, "beta {beta}");
    }

    let betas = [0.0, 0.02, 0.04, 0.06, 0.08, 0.1, 0.12];
    let report = lemma_bound_checks(&resolution, &betas);
    assert!(
        report.points_checked >= 10_000,
        "grid too small: {}",
        report.points_checked
    );
    assert!(report.passed(), "failures: {:?}", report.failures);
    assert!(start.elapsed().as_secs_f64() < 120.0, "must finish within 2 min");
    pass("09", start, "closed-form maxima and bound checks hold on the parameter grid");
}

#[test]
fn acceptance_10_failure_aware_matches_monte_carlo() {
    let start = Instant::now();
    let corpus = oracle_corpus(40);
    let mut structures = Vec::new();
    'outer: for instance in &corpus {
        for s in &instance.structures {
            structures.push((s.clone(), instance.config));
            if structures.len() == 50 {
                break 'outer;
            }
        }
    }
    assert_eq!(structures.len(), 50);
    let class_of = |_v| 0usize;
    for (i, (structure, base_config)) in structures.iter().enumerate() {
        for discount in [ChainDiscount::Prefix, ChainDiscount::AllOrNothing] {
            let config = base_config.with_discount(discount);
            let (expected, _) = structure_utility(structure, &config, class_of);
            let (mc_mean, mc_se) = monte_carlo_utility(
                structure,
                config.edge_success_prob,
                discount,
                100_000,
                0xBEEF + i as u64,
            );
            assert!(
                (mc_mean - expected).abs() <= 3.0 * mc_se + EPS,
                "structure {i} ({:?}): closed form {expected}, Monte Carlo {mc_mean} +- {mc_se}",
                discount
            );
        }
    }
    pass("10", start, "50 structures x 2 discount modes match 1e5-trial Monte Carlo within 3 SE");
}

#[test]
fn acceptance_11_hybrid_utility_properties() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x11);

    // Boundary continuity of the two-class form, on dyadic samples where
    // float addition is exact.
    for _ in 0..10_000 {
        let u_h = rng.gen_range(0..=8192) as f64 / 64.0;
        let delta = rng.gen_range(0..=8192) as f64 / 64.0;
        let u_l = u_h + delta;
        // on the boundary the fair branch applies and equals the adjacent
        // utilitarian expression exactly
        let fair_value = u_delta_two_class(u_h, u_l, delta);
        assert_eq!(fair_value, 2.0 * u_h);
        assert_eq!(fair_value, u_h + (u_l - delta));
        if u_h >= delta {
            let u_l_low = u_h - delta;
            let other = u_delta_two_class(u_h, u_l_low, delta);
            assert_eq!(other, 2.0 * u_h);
            assert_eq!(other, u_h + (u_l_low + delta));
        }
    }

    // Two-class reduction of the multi-class form, exact on arbitrary floats.
    for _ in 0..10_000 {
        let u_h = rng.gen::<f64>() * 100.0;
        let u_l = rng.gen::<f64>() * 100.0;
        let delta = rng.gen::<f64>() * 20.0;
        assert_eq!(
            u_delta_multi(&[u_h, u_l], delta),
            u_delta_two_class(u_h, u_l, delta)
        );
    }

    // Pinned three-class boundary discontinuity: the fair branch scores 15
    // while the utilitarian expression at the same point gives 16.
    let boundary = u_delta_multi(&[5.0, 4.0, 3.0], 2.0);
    assert_eq!(boundary, 15.0);
    let utilitarian_expression = 5.0 + (4.0 + 2.0) + (3.0 + 2.0);
    assert_eq!(utilitarian_expression, 16.0);
    assert_ne!(boundary, utilitarian_expression);

    pass("11", start, "boundary continuity, two-class reduction, and the pinned three-class boundary gap");
}
