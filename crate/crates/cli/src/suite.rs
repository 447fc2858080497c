//! Built-in self-verification: the closed-form reduction chain, the
//! estimator-vs-closed-form cross check and the ordering shortcuts, as a
//! machine-readable pass/fail table.
//!
//! Setting `EMPTYSPACE_MUTATE=boolean-slope` perturbs the Boolean reference
//! curve by five percent; the suite must then fail (sanity check of the
//! harness itself).

use crate::{write_text, Failure, SuiteArgs};
use emptyspace::analytic::{
    boolean_hazard, gauss_poisson_hazard, mixed_poisson_hazard, neyman_scott_hazard,
    poisson_cluster_hazard,
};
use emptyspace::estimator::{pool_replications, EstimatorConfig};
use emptyspace::models::{
    ClusterPointLaw, ClusterSizeLaw, IntensityLaw, ProcessKind, ProcessSpec, ScalarLaw,
};
use emptyspace::orderings::{cum_order_check, Ordered};
use emptyspace::{DirectionSectors, GaugeBody, SemiMcConfig};
use serde::Serialize;
use std::f64::consts::PI;
use std::path::PathBuf;

#[derive(Serialize)]
struct CheckResult {
    name: String,
    pass: bool,
    detail: String,
}

struct Table {
    results: Vec<CheckResult>,
}

impl Table {
    fn push(&mut self, name: &str, pass: bool, detail: String) {
        println!("{name} {}", if pass { "PASS" } else { "FAIL" });
        self.results.push(CheckResult {
            name: name.to_string(),
            pass,
            detail,
        });
    }
}

pub fn run(args: &SuiteArgs) -> Result<(), Failure> {
    let mut seed = 1u64;
    let mut out_dir = PathBuf::from("out");
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Validation(format!("reading config: {e}")))?;
        let config = crate::config::ExperimentConfig::parse(&text).map_err(Failure::Validation)?;
        seed = config.seed;
        out_dir = PathBuf::from(config.out_dir);
    }
    if let Some(s) = args.seed {
        seed = s;
    }
    if let Some(o) = &args.out {
        out_dir = o.clone();
    }
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Failure::Validation(format!("creating {}: {e}", out_dir.display())))?;

    let mutate = std::env::var("EMPTYSPACE_MUTATE").ok();
    let mut table = Table {
        results: Vec::new(),
    };
    run_checks(&mut table, seed, mutate.as_deref());

    let json = serde_json::to_string_pretty(&table.results).expect("results serialize");
    write_text(&out_dir.join("reduction.json"), &format!("{json}\n"))?;
    let failed: Vec<&str> = table
        .results
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "reduction suite failed: {}",
            failed.join(", ")
        )))
    }
}

fn run_checks(table: &mut Table, seed: u64, mutate: Option<&str>) {
    let ball = GaugeBody::unit_ball(2);
    let lambda = 0.1;
    let sigma = 0.5;
    let t_grid: Vec<f64> = (1..=10).map(|i| 0.25 * i as f64).collect();
    let mc = SemiMcConfig {
        outer_samples: 20_000,
        inner_samples: 20_000,
        seed,
    };
    let points = ClusterPointLaw::IsotropicGaussian { sigma };

    // Closed reduction chain: all four point-grain evaluations coincide.
    let mut boolean = boolean_hazard(
        lambda,
        &ScalarLaw::zero(),
        &ball,
        2,
        &t_grid,
        &DirectionSectors::Full,
        &mc,
    )
    .expect("boolean hazard");
    if mutate == Some("boolean-slope") {
        for v in boolean.hazard[0].iter_mut() {
            *v *= 1.05;
        }
    }
    let gp = gauss_poisson_hazard(
        lambda, 0.0, &points, &ball, 2, &t_grid, &DirectionSectors::Full, &mc,
    )
    .expect("gauss-poisson hazard");
    let ns = neyman_scott_hazard(
        lambda,
        &ClusterSizeLaw::Deterministic { k: 1 },
        &points,
        &ball,
        2,
        &t_grid,
        &DirectionSectors::Full,
        &mc,
    )
    .expect("neyman-scott hazard");
    let pc_spec = ProcessSpec::neyman_scott(
        lambda,
        ClusterSizeLaw::Deterministic { k: 1 },
        points.clone(),
        ScalarLaw::zero(),
        20.0,
        2,
    );
    let pc = poisson_cluster_hazard(&pc_spec, &ball, &t_grid, &DirectionSectors::Full, &mc)
        .expect("cluster hazard");
    let mut worst = 0.0f64;
    for k in 0..t_grid.len() {
        let base = boolean.hazard[0][k];
        for v in [gp.hazard[0][k], ns.hazard[0][k], pc.hazard[0][k]] {
            worst = worst.max((v - base).abs() / base);
        }
    }
    table.push(
        "reduction-chain-closed",
        worst <= 1e-12,
        format!("worst relative deviation {worst:.3e}"),
    );

    // Directed chain: sector entries are Monte Carlo, three joint errors.
    let sectors = DirectionSectors::quadrants(4);
    let boolean4 = boolean_hazard(
        lambda,
        &ScalarLaw::zero(),
        &ball,
        2,
        &t_grid,
        &sectors,
        &mc,
    )
    .expect("boolean hazard");
    let ns4 = neyman_scott_hazard(
        lambda,
        &ClusterSizeLaw::Deterministic { k: 1 },
        &points,
        &ball,
        2,
        &t_grid,
        &sectors,
        &mc,
    )
    .expect("neyman-scott hazard");
    let mut ok = true;
    let mut worst_sigma = 0.0f64;
    for col in 1..=4usize {
        for k in 0..t_grid.len() {
            let se = ns4.hazard_se[col][k].max(1e-12);
            let dev = (ns4.hazard[col][k] - boolean4.hazard[col][k]).abs() / se;
            worst_sigma = worst_sigma.max(dev);
            ok &= dev <= 3.0;
        }
    }
    table.push(
        "reduction-chain-directed",
        ok,
        format!("worst deviation {worst_sigma:.2} joint standard errors"),
    );

    // Estimator versus the Boolean closed form on a small budget.
    let spec = ProcessSpec::poisson(1.0, ScalarLaw::Deterministic(0.5), 20.0, 2);
    let config = EstimatorConfig {
        t_grid: (1..=12).map(|i| 0.1 * i as f64).collect(),
        grid_resolution: 96,
        replications: 30,
        sectors: DirectionSectors::Full,
        seed,
    };
    let curve = pool_replications(&spec, &ball, &config).expect("estimate");
    let mut ok = true;
    let mut worst = 0.0f64;
    for (k, &t) in curve.t_grid.iter().enumerate() {
        let exact = 1.0 - (-PI * (0.5 + t) * (0.5 + t)).exp();
        let tol = (5.0 * curve.cdf_se[0][k]).max(0.02);
        let dev = (curve.cdf[0][k] - exact).abs();
        worst = worst.max(dev / tol);
        ok &= dev <= tol;
    }
    table.push(
        "estimator-vs-boolean",
        ok,
        format!("worst |delta|/tolerance {worst:.3}"),
    );

    // Determinism: identical seeds give identical output bytes.
    let again = pool_replications(&spec, &ball, &config).expect("estimate");
    let mut csv_a = Vec::new();
    let mut csv_b = Vec::new();
    curve.write_csv(&mut csv_a).expect("csv");
    again.write_csv(&mut csv_b).expect("csv");
    table.push(
        "estimator-deterministic",
        csv_a == csv_b,
        "same seed reproduces byte-identical output".to_string(),
    );

    // Mixed Poisson with a degenerate mixing law is the Boolean model.
    let mixed = mixed_poisson_hazard(
        &IntensityLaw::Degenerate { value: lambda },
        &ScalarLaw::Deterministic(0.4),
        &ball,
        2,
        &t_grid,
        &DirectionSectors::Full,
        &mc,
    )
    .expect("mixed hazard");
    let bool_grain = boolean_hazard(
        lambda,
        &ScalarLaw::Deterministic(0.4),
        &ball,
        2,
        &t_grid,
        &DirectionSectors::Full,
        &mc,
    )
    .expect("boolean hazard");
    let worst = t_grid
        .iter()
        .enumerate()
        .map(|(k, _)| (mixed.hazard[0][k] - bool_grain.hazard[0][k]).abs() / bool_grain.hazard[0][k])
        .fold(0.0f64, f64::max);
    table.push(
        "mixed-degenerate-identity",
        worst <= 1e-12,
        format!("worst relative deviation {worst:.3e}"),
    );

    // First-cumulant order shortcut on the worked Gamma pair.
    let g22 = IntensityLaw::Gamma { shape: 2.0, rate: 2.0 };
    let g11 = IntensityLaw::Gamma { shape: 1.0, rate: 1.0 };
    let forward = cum_order_check(&g22, &g11, 50.0, 2001).expect("cum check");
    let reverse = cum_order_check(&g11, &g22, 50.0, 2001).expect("cum check");
    table.push(
        "gamma-cum-shortcut",
        forward.ordered == Ordered::Yes && reverse.ordered == Ordered::No,
        format!("forward {:?}, reverse {:?}", forward.ordered, reverse.ordered),
    );

    // Mixed Poisson volume fraction sits below Boolean (strict at equal mean).
    let mixed_spec = ProcessSpec {
        process: ProcessKind::MixedPoisson {
            mixing: IntensityLaw::Gamma { shape: 2.0, rate: 20.0 },
        },
        grain_radius: ScalarLaw::Deterministic(0.4),
        window: 20.0,
        dimension: 2,
    };
    let boolean_spec = ProcessSpec::poisson(0.1, ScalarLaw::Deterministic(0.4), 20.0, 2);
    let (vf_mixed, _) =
        emptyspace::analytic::volume_fraction(&mixed_spec, &mc).expect("volume fraction");
    let (vf_boolean, _) =
        emptyspace::analytic::volume_fraction(&boolean_spec, &mc).expect("volume fraction");
    table.push(
        "volume-fraction-jensen",
        vf_mixed < vf_boolean,
        format!("mixed {vf_mixed:.6} < boolean {vf_boolean:.6}"),
    );
}
