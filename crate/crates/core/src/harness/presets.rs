//! The benchmark experiments as ready-made configurations.

use super::config::{ExperimentConfig, FilterEntry, MetricsConfig, ModelSpec, TruthConfig};
use super::sweep::{SweepAxis, SweepConfig};
use crate::filters::{FilterParams, Method};
use crate::models::{DoubleWellParams, Lorenz96Params, SineParams};

fn trio(b: usize, n: usize) -> Vec<FilterEntry> {
    [Method::Ensbf, Method::Pf, Method::Enkf]
        .into_iter()
        .map(|m| FilterEntry::new(m, FilterParams::new(b, n)))
        .collect()
}

/// Sine model, `B = 500`, `N = 100`, 50 repeats of 100 steps.
pub fn example1() -> ExperimentConfig {
    ExperimentConfig {
        name: "example1_sine".into(),
        model: ModelSpec::Sine(SineParams::default()),
        filters: trio(500, 100),
        steps: 100,
        repeats: 50,
        ..ExperimentConfig::default()
    }
}

/// Bridge filter alone on the sine model at `B = 200`, `N = 64`, 50 repeats;
/// the swept axis overrides one of the two.
pub fn example1_sweep(axis: SweepAxis, values: Vec<usize>) -> SweepConfig {
    SweepConfig {
        experiment: ExperimentConfig {
            name: "example1_sweep".into(),
            filters: vec![FilterEntry::new(Method::Ensbf, FilterParams::new(200, 64))],
            ..example1()
        },
        axis,
        values,
    }
}

/// Double well with switching every 40 steps, `N = 20`, 200 steps, 10 repeats.
pub fn example2(beta: f64, ensemble_size: usize) -> ExperimentConfig {
    ExperimentConfig {
        name: format!("example2_double_well_beta{beta}_b{ensemble_size}"),
        model: ModelSpec::DoubleWell(DoubleWellParams {
            beta,
            ..DoubleWellParams::default()
        }),
        filters: trio(ensemble_size, 20),
        steps: 200,
        repeats: 10,
        ..ExperimentConfig::default()
    }
}

/// Damped Lorenz-96 with `α = 0.2` and `N = 20`: `B = 600`, `Γ = 0.04 I` at
/// `d = 4`, and `B = 800`, `Γ = 0.0225 I` above; 200 steps, burn-in 20, 10 repeats.
pub fn example4(dim: usize) -> ExperimentConfig {
    let (b, gamma) = if dim <= 4 { (600, 0.04) } else { (800, 0.0225) };
    ExperimentConfig {
        name: format!("example4_lorenz96_d{dim}"),
        model: ModelSpec::Lorenz96(Lorenz96Params {
            dim,
            obs_cov_scale: gamma,
            include_damping: true,
            ..Lorenz96Params::default()
        }),
        truth: TruthConfig::default(),
        filters: trio(b, 20),
        steps: 200,
        repeats: 10,
        metrics: MetricsConfig {
            smoothing_window: 20,
            burn_in: 20,
        },
        ..ExperimentConfig::default()
    }
}
