//! Cross checks between the analytic formulas, their limits, and the
//! simulation estimator on the non-Neyman-Scott paths.

use emptyspace::analytic::{
    asymptotic_limits, gauss_poisson_hazard, mixed_poisson_hazard, neyman_scott_hazard,
};
use emptyspace::estimator::{pool_replications, EstimatorConfig};
use emptyspace::geometry::DirectionSectors;
use emptyspace::models::{
    ClusterPointLaw, ClusterSizeLaw, IntensityLaw, ProcessKind, ProcessSpec, ScalarLaw,
};
use emptyspace::{GaugeBody, SemiMcConfig};
use std::f64::consts::TAU;

#[test]
fn limits_bracket_the_scaled_hazard() {
    // The scaled hazard decreases from the small-dilation limit to the
    // large-dilation limit; every grid value lies between them.
    let spec = ProcessSpec::neyman_scott(
        0.05,
        ClusterSizeLaw::Poisson { mean: 2.0 },
        ClusterPointLaw::IsotropicGaussian { sigma: 0.5 },
        ScalarLaw::zero(),
        20.0,
        2,
    );
    let ball = GaugeBody::unit_ball(2);
    let mc = SemiMcConfig {
        outer_samples: 40_000,
        inner_samples: 0,
        seed: 17,
    };
    let limits = asymptotic_limits(&spec, &ball, &DirectionSectors::Full, &mc).unwrap();
    let t_grid: Vec<f64> = (1..=25).map(|i| 0.2 * i as f64).collect();
    let h = neyman_scott_hazard(
        0.05,
        &ClusterSizeLaw::Poisson { mean: 2.0 },
        &ClusterPointLaw::IsotropicGaussian { sigma: 0.5 },
        &ball,
        2,
        &t_grid,
        &DirectionSectors::Full,
        &mc,
    )
    .unwrap();
    for (k, &t) in t_grid.iter().enumerate() {
        let scaled = h.hazard[0][k] / t;
        let se = h.hazard_se[0][k] / t;
        assert!(
            scaled <= limits.small_t[0] + 3.0 * se,
            "t = {t}: scaled {scaled} above small-t limit {}",
            limits.small_t[0]
        );
        assert!(
            scaled >= limits.large_t[0] - 3.0 * se,
            "t = {t}: scaled {scaled} below large-t limit {}",
            limits.large_t[0]
        );
    }
}

#[test]
fn estimator_matches_gauss_poisson_formula() {
    let p = 0.5;
    let lambda_parent = 0.1;
    let sigma = 0.4;
    let spec = ProcessSpec {
        process: ProcessKind::GaussPoisson {
            lambda_parent,
            p,
            secondary: ClusterPointLaw::IsotropicGaussian { sigma },
        },
        grain_radius: ScalarLaw::zero(),
        window: 20.0,
        dimension: 2,
    };
    let ball = GaugeBody::unit_ball(2);
    let config = EstimatorConfig {
        t_grid: (1..=16).map(|i| 0.15 * i as f64).collect(),
        grid_resolution: 128,
        replications: 150,
        sectors: DirectionSectors::Full,
        seed: 71,
    };
    let curve = pool_replications(&spec, &ball, &config).unwrap();
    let analytic = gauss_poisson_hazard(
        lambda_parent,
        p,
        &ClusterPointLaw::IsotropicGaussian { sigma },
        &ball,
        2,
        &config.t_grid,
        &DirectionSectors::Full,
        &SemiMcConfig::default(),
    )
    .unwrap();
    for k in 1..config.t_grid.len() - 1 {
        if curve.masked[0][k] {
            continue;
        }
        let dev = (curve.hazard[0][k] - analytic.hazard[0][k]).abs();
        let tol = (4.0 * curve.hazard_se[0][k]).max(0.08 * analytic.hazard[0][k]);
        assert!(
            dev <= tol,
            "t = {}: estimator {} vs formula {}",
            config.t_grid[k],
            curve.hazard[0][k],
            analytic.hazard[0][k]
        );
    }
}

#[test]
fn estimator_matches_mixed_poisson_formula() {
    let mixing = IntensityLaw::Gamma { shape: 2.0, rate: 2.0 };
    let spec = ProcessSpec {
        process: ProcessKind::MixedPoisson { mixing: mixing.clone() },
        grain_radius: ScalarLaw::Deterministic(0.3),
        window: 20.0,
        dimension: 2,
    };
    let ball = GaugeBody::unit_ball(2);
    let config = EstimatorConfig {
        t_grid: (1..=12).map(|i| 0.1 * i as f64).collect(),
        grid_resolution: 128,
        replications: 200,
        sectors: DirectionSectors::Full,
        seed: 72,
    };
    let curve = pool_replications(&spec, &ball, &config).unwrap();
    let analytic = mixed_poisson_hazard(
        &mixing,
        &ScalarLaw::Deterministic(0.3),
        &ball,
        2,
        &config.t_grid,
        &DirectionSectors::Full,
        &SemiMcConfig::default(),
    )
    .unwrap();
    for k in 1..config.t_grid.len() - 1 {
        if curve.masked[0][k] {
            continue;
        }
        let dev = (curve.hazard[0][k] - analytic.hazard[0][k]).abs();
        let tol = (4.0 * curve.hazard_se[0][k]).max(0.08 * analytic.hazard[0][k]);
        assert!(
            dev <= tol,
            "t = {}: estimator {} vs formula {}",
            config.t_grid[k],
            curve.hazard[0][k],
            analytic.hazard[0][k]
        );
    }
    // Sanity anchor: the mixed volume fraction from the curve's own F column.
    let tau_check = analytic.hazard[0][0] / (TAU * 0.4);
    assert!(tau_check > 0.0);
}
