//! `emptyspace`: config-driven experiment runner for empty-space hazard
//! analysis of germ-grain models.
//!
//! Exit codes: 0 success, 2 configuration/validation failure, 3 failed
//! acceptance check in `--check` mode (and any failed reduction-suite check).

mod config;
mod plot;
mod suite;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use config::{ExperimentConfig, OrderSpec};
use emptyspace::analytic::{analytic_hazard_for, asymptotic_limits, AnalyticHazard};
use emptyspace::estimator::{empirical_hazard_order, pool_replications, HazardCurve};
use emptyspace::models::ProcessSpec;
use emptyspace::orderings::{
    cum_order_check, lg_order_check, stochastic_scaling_order, Ordered, OrderingVerdict,
};
use plot::{line_plot, Series, PALETTE};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "emptyspace", version, about = "Empty-space hazard experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Turn comparisons into assertions (exit 3 on failure).
    #[arg(long)]
    check: bool,
    /// Override the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SuiteArgs {
    /// Optional config; only `seed` and `out_dir` are honored.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate scenes and estimate the empty-space hazard curve.
    Estimate(RunArgs),
    /// Evaluate the analytic hazard curve for a process spec.
    Analytic(RunArgs),
    /// Compare the analytic hazard curves of two specs of equal intensity.
    Compare(RunArgs),
    /// Check a stochastic-order relation between two laws.
    OrderCheck(RunArgs),
    /// Small- and large-dilation hazard limits for a process spec.
    Asymptotics(RunArgs),
    /// Built-in self-verification: reduction chains and cross checks.
    ReductionSuite(SuiteArgs),
}

pub enum Failure {
    Validation(String),
    Check(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn validation<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Validation(msg.into()))
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("EMPTYSPACE_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Estimate(args) => with_config(&args, run_estimate),
        Command::Analytic(args) => with_config(&args, run_analytic),
        Command::Compare(args) => with_config(&args, run_compare),
        Command::OrderCheck(args) => with_config(&args, run_order_check),
        Command::Asymptotics(args) => with_config(&args, run_asymptotics),
        Command::ReductionSuite(args) => suite::run(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("validation error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

struct Run {
    config: ExperimentConfig,
    out_dir: PathBuf,
    check: bool,
}

fn with_config(
    args: &RunArgs,
    f: impl FnOnce(&Run) -> Result<(), Failure>,
) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))
        .map_err(Failure::Other)?;
    let mut config = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return validation(e),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.out_dir = out.display().to_string();
    }
    let out_dir = PathBuf::from(&config.out_dir);
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))
        .map_err(Failure::Other)?;
    let run = Run {
        config,
        out_dir,
        check: args.check,
    };
    f(&run)?;
    write_manifest(&run)?;
    Ok(())
}

fn write_manifest(run: &Run) -> Result<(), Failure> {
    let canonical = run.config.canonical_json();
    let manifest = serde_json::json!({
        "config_hash": format!("{:016x}", emptyspace::fingerprint(canonical.as_bytes())),
        "seed": run.config.seed,
        "versions": {
            "emptyspace": env!("CARGO_PKG_VERSION"),
        },
    });
    write_text(
        &run.out_dir.join("manifest.json"),
        &format!("{:#}\n", manifest),
    )
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Other)
}

fn require_spec<'a>(config: &'a ExperimentConfig, field: &str) -> Result<&'a ProcessSpec, Failure> {
    let spec = match field {
        "spec" => &config.spec,
        "spec_a" => &config.spec_a,
        "spec_b" => &config.spec_b,
        _ => unreachable!(),
    };
    match spec {
        Some(s) => {
            if let Err(e) = s.validate() {
                return validation(format!("{field}: {e}"));
            }
            Ok(s)
        }
        None => validation(format!("this subcommand requires the {field:?} field")),
    }
}

fn print_warnings(spec: &ProcessSpec, t_max: f64) {
    for w in spec.torus_warnings(t_max) {
        eprintln!("warning: {w}");
    }
}

fn curve_series(t: &[f64], labels: &[String], hazard: &[Vec<f64>], prefix: &str) -> Vec<Series> {
    labels
        .iter()
        .enumerate()
        .map(|(i, label)| Series {
            name: format!("{prefix}{label}"),
            color: PALETTE[i % PALETTE.len()],
            points: t.iter().copied().zip(hazard[i].iter().copied()).collect(),
        })
        .collect()
}

fn run_estimate(run: &Run) -> Result<(), Failure> {
    let config = &run.config;
    let spec = require_spec(config, "spec")?;
    let Some(params) = &config.estimator else {
        return validation("estimate requires the \"estimator\" block");
    };
    let est_config = params.to_config(&config.sectors, config.seed);
    let gauge = config.gauge_for(spec.dimension).map_err(Failure::Validation)?;
    if let Err(e) = est_config.validate(spec.window, spec.dimension) {
        return validation(e.to_string());
    }
    print_warnings(spec, params.t_max);
    let curve = pool_replications(spec, &gauge, &est_config)
        .map_err(|e| Failure::Validation(e.to_string()))?;
    write_curve(run, "curve", &curve)?;
    println!(
        "estimate: {} replications, {} grid points -> {}",
        est_config.replications,
        est_config.t_grid.len(),
        run.out_dir.join("curve.csv").display()
    );
    Ok(())
}

fn write_curve(run: &Run, stem: &str, curve: &HazardCurve) -> Result<(), Failure> {
    let mut csv = Vec::new();
    curve.write_csv(&mut csv).context("csv").map_err(Failure::Other)?;
    write_text(
        &run.out_dir.join(format!("{stem}.csv")),
        &String::from_utf8(csv).expect("ascii"),
    )?;
    let svg = line_plot(
        "empirical empty-space hazard",
        "t",
        "r(t)",
        &curve_series(&curve.t_grid, &curve.labels, &curve.hazard, ""),
    );
    write_text(&run.out_dir.join(format!("{stem}.svg")), &svg)
}

fn write_analytic(run: &Run, stem: &str, curve: &AnalyticHazard) -> Result<(), Failure> {
    let mut csv = Vec::new();
    curve.write_csv(&mut csv).context("csv").map_err(Failure::Other)?;
    write_text(
        &run.out_dir.join(format!("{stem}.csv")),
        &String::from_utf8(csv).expect("ascii"),
    )?;
    let svg = line_plot(
        "analytic empty-space hazard",
        "t",
        "r(t)",
        &curve_series(&curve.t_grid, &curve.labels, &curve.hazard, ""),
    );
    write_text(&run.out_dir.join(format!("{stem}.svg")), &svg)
}

fn run_analytic(run: &Run) -> Result<(), Failure> {
    let config = &run.config;
    let spec = require_spec(config, "spec")?;
    let Some(params) = &config.estimator else {
        return validation("analytic requires the \"estimator\" block for its t-grid");
    };
    let gauge = config.gauge_for(spec.dimension).map_err(Failure::Validation)?;
    let t_grid = params.t_grid();
    let mc = config.semi_mc.to_config(config.seed);
    let curve = analytic_hazard_for(spec, &gauge, &t_grid, &config.sectors, &mc)
        .map_err(|e| Failure::Validation(e.to_string()))?;
    write_analytic(run, "analytic", &curve)?;
    println!(
        "analytic: {} grid points -> {}",
        t_grid.len(),
        run.out_dir.join("analytic.csv").display()
    );
    Ok(())
}

fn verdict_json(
    order: &str,
    law_a: serde_json::Value,
    law_b: serde_json::Value,
    verdict: &OrderingVerdict,
) -> serde_json::Value {
    serde_json::json!({
        "order": order,
        "law_a": law_a,
        "law_b": law_b,
        "verdict": verdict.ordered,
        "margin": verdict.worst_margin,
        "witness": verdict.witness,
        "method": verdict.method,
    })
}

fn run_compare(run: &Run) -> Result<(), Failure> {
    let config = &run.config;
    let spec_a = require_spec(config, "spec_a")?;
    let spec_b = require_spec(config, "spec_b")?;
    // The hazard-comparison propositions assume equal germ intensity.
    let (ia, ib) = (spec_a.intensity(), spec_b.intensity());
    if (ia - ib).abs() / ia >= 1e-9 {
        return validation(format!(
            "compare requires equal germ intensities, got {ia} vs {ib}"
        ));
    }
    if spec_a.dimension != spec_b.dimension || spec_a.window != spec_b.window {
        return validation("compare requires matching window and dimension");
    }
    let Some(params) = &config.estimator else {
        return validation("compare requires the \"estimator\" block for its t-grid");
    };
    let gauge = config.gauge_for(spec_a.dimension).map_err(Failure::Validation)?;
    let t_grid = params.t_grid();
    let mc = config.semi_mc.to_config(config.seed);
    let mut curve_a = analytic_hazard_for(spec_a, &gauge, &t_grid, &config.sectors, &mc)
        .map_err(|e| Failure::Validation(e.to_string()))?;
    let mut curve_b = analytic_hazard_for(spec_b, &gauge, &t_grid, &config.sectors, &mc)
        .map_err(|e| Failure::Validation(e.to_string()))?;
    curve_a.mask_by_survival(0.05);
    curve_b.mask_by_survival(0.05);
    let verdict = empirical_hazard_order(&curve_a.table(), &curve_b.table(), config.slack)
        .map_err(|e| Failure::Validation(e.to_string()))?;

    write_analytic(run, "curve_a", &curve_a)?;
    write_analytic(run, "curve_b", &curve_b)?;
    let report = verdict_json(
        "hazard",
        serde_json::to_value(spec_a).expect("spec serializes"),
        serde_json::to_value(spec_b).expect("spec serializes"),
        &verdict,
    );
    write_text(&run.out_dir.join("verdict.json"), &format!("{report:#}\n"))?;
    let svg = line_plot(
        "hazard comparison (total)",
        "t",
        "r(t)",
        &[
            Series {
                name: "A".into(),
                color: PALETTE[0],
                points: t_grid.iter().copied().zip(curve_a.hazard[0].iter().copied()).collect(),
            },
            Series {
                name: "B".into(),
                color: PALETTE[1],
                points: t_grid.iter().copied().zip(curve_b.hazard[0].iter().copied()).collect(),
            },
        ],
    );
    write_text(&run.out_dir.join("compare.svg"), &svg)?;
    println!(
        "compare: verdict {:?} margin {:.4e}",
        verdict.ordered, verdict.worst_margin
    );
    if run.check && verdict.ordered != Ordered::Yes {
        return Err(Failure::Check(format!(
            "hazard ordering not confirmed: {:?}",
            verdict.ordered
        )));
    }
    Ok(())
}

fn run_order_check(run: &Run) -> Result<(), Failure> {
    let config = &run.config;
    let Some(order) = &config.order else {
        return validation("order-check requires the \"order\" block");
    };
    let (name, law_a, law_b, verdict) = match order {
        OrderSpec::Lg {
            law_a,
            law_b,
            grid_points,
        } => {
            let v = lg_order_check(law_a, law_b, *grid_points)
                .map_err(|e| Failure::Validation(e.to_string()))?;
            (
                "lg",
                serde_json::to_value(law_a).expect("law serializes"),
                serde_json::to_value(law_b).expect("law serializes"),
                v,
            )
        }
        OrderSpec::Cum {
            law_a,
            law_b,
            s_max,
            grid_points,
        } => {
            let v = cum_order_check(law_a, law_b, *s_max, *grid_points)
                .map_err(|e| Failure::Validation(e.to_string()))?;
            (
                "cum",
                serde_json::to_value(law_a).expect("law serializes"),
                serde_json::to_value(law_b).expect("law serializes"),
                v,
            )
        }
        OrderSpec::Scaling { law_a, law_b } => {
            let v = stochastic_scaling_order(law_a, law_b);
            (
                "scaling",
                serde_json::to_value(law_a).expect("law serializes"),
                serde_json::to_value(law_b).expect("law serializes"),
                v,
            )
        }
    };
    let report = verdict_json(name, law_a, law_b, &verdict);
    write_text(&run.out_dir.join("verdict.json"), &format!("{report:#}\n"))?;
    println!(
        "order-check ({name}): {:?} margin {:.4e}",
        verdict.ordered, verdict.worst_margin
    );
    if run.check && verdict.ordered != Ordered::Yes {
        return Err(Failure::Check(format!(
            "order not confirmed: {:?}",
            verdict.ordered
        )));
    }
    Ok(())
}

fn run_asymptotics(run: &Run) -> Result<(), Failure> {
    let config = &run.config;
    let spec = require_spec(config, "spec")?;
    let gauge = config.gauge_for(spec.dimension).map_err(Failure::Validation)?;
    let mc = config.semi_mc.to_config(config.seed);
    let limits = asymptotic_limits(spec, &gauge, &config.sectors, &mc)
        .map_err(|e| Failure::Validation(e.to_string()))?;
    let json = serde_json::to_value(&limits).expect("limits serialize");
    write_text(&run.out_dir.join("asymptotics.json"), &format!("{json:#}\n"))?;
    println!(
        "asymptotics: small_t[all] = {:.6}, large_t[all] = {:.6}",
        limits.small_t[0], limits.large_t[0]
    );
    Ok(())
}
