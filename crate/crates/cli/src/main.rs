//! `fairclear` command line: solve one instance under a policy, run
//! experiment sweeps, generate random-model instances, evaluate the
//! closed-form theory, and build worst-case fixtures.
//!
//! Exit codes: 0 on success, 2 on configuration errors (bad arguments,
//! unreadable or malformed inputs), 3 on solve errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fairclear_core::fairness::{ClassSpec, ClearingContext, HybridMode, Region};
use fairclear_core::harness::{self, SweepConfig};
use fairclear_core::instance::{parse_instance, serialize_instance, CompatibilityGraph};
use fairclear_core::randmodel::{self, GridResolution, ModelParams};
use fairclear_core::worstcase::{self, WorstCaseFamily};
use fairclear_core::{pof, ChainDiscount, ClearingConfig};

#[derive(Parser)]
#[command(name = "fairclear", version, about = "Exact kidney-exchange clearing with fairness rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RuleArg {
    Util,
    Alpha,
    Weighted,
    Hybrid,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum HybridModeArg {
    Exact,
    Grid,
}

impl From<HybridModeArg> for HybridMode {
    fn from(value: HybridModeArg) -> Self {
        match value {
            HybridModeArg::Exact => HybridMode::Exact,
            HybridModeArg::Grid => HybridMode::Grid,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DiscountArg {
    Prefix,
    AllOrNothing,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance under a policy and print a JSON report.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        rule: RuleArg,
        /// alpha, gamma, or delta, depending on the rule.
        #[arg(long)]
        param: Option<f64>,
        #[arg(long, default_value_t = 3)]
        cycle_cap: usize,
        #[arg(long, default_value_t = 3)]
        chain_cap: usize,
        #[arg(long, default_value_t = 1.0)]
        edge_prob: f64,
        /// Override the instance's sensitization threshold.
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, value_enum, default_value_t = HybridModeArg::Exact)]
        hybrid_mode: HybridModeArg,
        #[arg(long, value_enum, default_value_t = DiscountArg::Prefix)]
        chain_discount: DiscountArg,
    },
    /// Run a parameter sweep from a JSON config ("default" for the built-in
    /// corpus) and write CSV reports.
    Sweep {
        #[arg(long)]
        config: String,
        #[arg(long)]
        out: PathBuf,
        /// Seed override for the built-in default corpus.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sample a random-model instance and write it in the instance format.
    Gen {
        #[arg(long)]
        model_params: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Closed-form random-model analytics over a beta grid.
    Theory {
        /// Comma-separated beta values, e.g. "0,0.025,0.05".
        #[arg(long)]
        beta_grid: String,
        /// Blood-type fraction grid step.
        #[arg(long, default_value_t = 0.01)]
        mu_step: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a worst-case family fixture, verify it, and optionally export it.
    Worstcase {
        /// lex-cycle | lex-chain | weighted-cycle | weighted-chain |
        /// long-chain | long-cycle
        #[arg(long)]
        family: String,
        /// Cycle or chain cap (capped families).
        #[arg(long)]
        cap: Option<usize>,
        /// Path length (uncapped families).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        gamma: Option<f64>,
        /// Write the instance JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Config(String),
    Solve(String),
}

impl CliError {
    fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    fn solve(e: impl std::fmt::Display) -> Self {
        CliError::Solve(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Solve(message)) => {
            eprintln!("solve error: {message}");
            ExitCode::from(3)
        }
    }
}

fn load_graph(path: &Path, tau: Option<f64>) -> Result<CompatibilityGraph, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Config(format!("read {}: {e}", path.display())))?;
    let graph = parse_instance(&bytes)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    match tau {
        Some(t) => graph.with_tau(t).map_err(CliError::config),
        None => Ok(graph),
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Solve {
            instance,
            rule,
            param,
            cycle_cap,
            chain_cap,
            edge_prob,
            tau,
            hybrid_mode,
            chain_discount,
        } => {
            let graph = load_graph(&instance, tau)?;
            let discount = match chain_discount {
                DiscountArg::Prefix => ChainDiscount::Prefix,
                DiscountArg::AllOrNothing => ChainDiscount::AllOrNothing,
            };
            let config = ClearingConfig::new(cycle_cap, chain_cap, edge_prob)
                .map_err(CliError::config)?
                .with_discount(discount);
            let ctx = ClearingContext::new(graph, config).map_err(CliError::solve)?;
            let efficient = ctx.utilitarian();
            let fair = ctx.fair_max();
            let u_h_max = ctx.fair_score(&fair.selected);

            let need_param = || {
                param.ok_or_else(|| {
                    CliError::Config("this rule requires --param".to_string())
                })
            };
            let (outcome, region, rule_name) = match rule {
                RuleArg::Util => (efficient.clone(), Region::NotApplicable, "util"),
                RuleArg::Alpha => (
                    ctx.alpha_lex(need_param()?).map_err(CliError::config)?,
                    Region::NotApplicable,
                    "alpha",
                ),
                RuleArg::Weighted => (
                    ctx.weighted(need_param()?).map_err(CliError::config)?,
                    Region::NotApplicable,
                    "weighted",
                ),
                RuleArg::Hybrid => {
                    let classes = ClassSpec::two_class(ctx.graph());
                    let (outcome, region) = ctx
                        .hybrid(need_param()?, &classes, hybrid_mode.into())
                        .map_err(CliError::config)?;
                    (outcome, region, "hybrid")
                }
            };

            let u_e = efficient.matching.total_utility;
            let u_rule = outcome.matching.total_utility;
            let pof_value = pof(u_e, u_rule).map_err(CliError::solve)?;
            let percent_f = if u_h_max == 0.0 {
                1.0
            } else {
                ctx.fair_score(&outcome.selected) / u_h_max
            };
            let structures: Vec<serde_json::Value> = outcome
                .matching
                .structures
                .iter()
                .map(|s| {
                    serde_json::json!({
                        "kind": match s.kind {
                            fairclear_core::StructureKind::Cycle => "cycle",
                            fairclear_core::StructureKind::Chain => "chain",
                        },
                        "vertices": s.vertices,
                        "expected_utility": s.expected_utility,
                    })
                })
                .collect();
            let report = serde_json::json!({
                "instance": instance.display().to_string(),
                "rule": rule_name,
                "parameter": param,
                "cycle_cap": cycle_cap,
                "chain_cap": chain_cap,
                "edge_prob": edge_prob,
                "u_e": u_e,
                "u_rule": u_rule,
                "pof": pof_value,
                "percent_f": percent_f,
                "region": region.label(),
                "matching": {
                    "total_utility": u_rule,
                    "structures": structures,
                },
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("json"));
            Ok(())
        }
        Command::Sweep { config, out, seed } => {
            let sweep_config: SweepConfig = if config == "default" {
                harness::default_corpus_config(seed.unwrap_or(0))
            } else {
                let bytes = std::fs::read(&config)
                    .map_err(|e| CliError::Config(format!("read {config}: {e}")))?;
                serde_json::from_slice(&bytes)
                    .map_err(|e| CliError::Config(format!("{config}: {e}")))?
            };
            sweep_config.validate().map_err(CliError::config)?;
            let rows = harness::run_sweep(&sweep_config).map_err(CliError::solve)?;
            let summary = harness::aggregate(&rows);
            harness::emit_report(&rows, &summary, &out).map_err(CliError::solve)?;
            println!(
                "wrote {} result rows and {} summary rows to {}",
                rows.len(),
                summary.len(),
                out.display()
            );
            Ok(())
        }
        Command::Gen { model_params, out } => {
            let bytes = std::fs::read(&model_params)
                .map_err(|e| CliError::Config(format!("read {}: {e}", model_params.display())))?;
            let params: ModelParams = serde_json::from_slice(&bytes)
                .map_err(|e| CliError::Config(format!("{}: {e}", model_params.display())))?;
            let graph = randmodel::sample_graph(&params).map_err(CliError::config)?;
            std::fs::write(&out, serialize_instance(&graph)).map_err(CliError::solve)?;
            println!(
                "wrote instance with {} vertices and {} edges to {}",
                graph.num_vertices(),
                graph.num_edges(),
                out.display()
            );
            Ok(())
        }
        Command::Theory {
            beta_grid,
            mu_step,
            out,
        } => {
            let betas: Vec<f64> = beta_grid
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Config(format!("bad --beta-grid: {e}")))?;
            if betas.is_empty() {
                return Err(CliError::Config("empty --beta-grid".to_string()));
            }
            let resolution = GridResolution {
                mu_step,
                ..GridResolution::default()
            };
            std::fs::create_dir_all(&out).map_err(CliError::solve)?;
            let mut regimes = String::from("beta,regime,pof,u_E,violated_constraints\n");
            for &beta in &betas {
                let (max_pof, arg) = randmodel::max_pof_details(beta, &resolution);
                match arg {
                    Some((point, regime)) => {
                        let result = randmodel::classify_regime(&point.params(beta))
                            .map_err(CliError::solve)?;
                        regimes.push_str(&format!(
                            "{beta},{},{max_pof},{},{}\n",
                            regime.label(),
                            result.u_e.map(|v| v.to_string()).unwrap_or_default(),
                            result.violations.join("; "),
                        ));
                    }
                    None => regimes.push_str(&format!("{beta},unclassified,,,\n")),
                }
            }
            std::fs::write(out.join("regimes.csv"), regimes).map_err(CliError::solve)?;

            let report = randmodel::lemma_bound_checks(&resolution, &betas);
            let mut lemma = format!(
                "points_checked,bound_checks,failures,passed\n{},{},{},{}\n",
                report.points_checked,
                report.bound_checks,
                report.failures.len(),
                report.passed()
            );
            for failure in &report.failures {
                lemma.push_str(&format!("# {failure}\n"));
            }
            std::fs::write(out.join("lemma_checks.csv"), lemma).map_err(CliError::solve)?;
            println!(
                "wrote theory reports for {} beta values to {}",
                betas.len(),
                out.display()
            );
            Ok(())
        }
        Command::Worstcase {
            family,
            cap,
            n,
            gamma,
            out,
        } => {
            let built: WorstCaseFamily = match family.as_str() {
                "lex-cycle" => worstcase::lex_cycle_instance(require(cap, "--cap")?),
                "lex-chain" => worstcase::lex_chain_instance(require(cap, "--cap")?),
                "weighted-cycle" => worstcase::weighted_cycle_instance(
                    require(cap, "--cap")?,
                    require(gamma, "--gamma")?,
                ),
                "weighted-chain" => worstcase::weighted_chain_instance(
                    require(cap, "--cap")?,
                    require(gamma, "--gamma")?,
                ),
                "long-chain" => worstcase::long_chain_instance(
                    require(n, "--n")?,
                    require(gamma, "--gamma")?,
                ),
                "long-cycle" => worstcase::long_cycle_instance(
                    require(n, "--n")?,
                    require(gamma, "--gamma")?,
                ),
                other => {
                    return Err(CliError::Config(format!("unknown family {other:?}")));
                }
            }
            .map_err(CliError::config)?;
            let measured = worstcase::measured_pof(&built).map_err(CliError::solve)?;
            let report = serde_json::json!({
                "family": family,
                "expected_pof": built.expected_pof,
                "measured_pof": measured,
                "vertices": built.graph.num_vertices(),
                "edges": built.graph.num_edges(),
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("json"));
            if let Some(path) = out {
                std::fs::write(&path, serialize_instance(&built.graph))
                    .map_err(CliError::solve)?;
            }
            Ok(())
        }
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("this family requires {flag}")))
}
