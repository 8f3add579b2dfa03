//! Repeated, paired filtering experiments.

use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{config_hash, ExperimentConfig};
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::filters::{run_filter, simulate_trajectory, Method, StateSpaceModel, Trajectory};
use crate::metrics::{mean_and_stderr, smoothed_rmse};
use crate::rng::{purpose, RngStream};

/// Stream key under which filter `k` of a repeat draws its randomness.
const FILTER_KEY: u64 = 0x6669_6c74;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRun {
    pub label: String,
    pub method: Method,
    /// Posterior means at steps `1..=J`.
    pub means: Vec<Vec<f64>>,
    pub rmse: Vec<f64>,
    pub smoothed_rmse: Vec<f64>,
}

impl FilterRun {
    /// Mean RMSE over steps after `burn_in`.
    pub fn rmse_after(&self, burn_in: usize) -> f64 {
        let tail = &self.rmse[burn_in.min(self.rmse.len())..];
        if tail.is_empty() {
            return f64::NAN;
        }
        tail.iter().sum::<f64>() / tail.len() as f64
    }

    pub fn terminal_smoothed_rmse(&self) -> f64 {
        self.smoothed_rmse.last().copied().unwrap_or(f64::NAN)
    }
}

/// One repeat: the shared truth and every filter run on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub repeat: usize,
    pub seed: u64,
    pub config_hash: String,
    pub trajectory: Trajectory,
    pub filters: Vec<FilterRun>,
    pub wall_clock_secs: f64,
}

impl RunRecord {
    pub fn filter(&self, label: &str) -> Option<&FilterRun> {
        self.filters.iter().find(|f| f.label == label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatFailure {
    pub repeat: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub records: Vec<RunRecord>,
    pub failures: Vec<RepeatFailure>,
}

impl ExperimentResult {
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }

    /// Per-repeat values of `f` for the filter `label`.
    pub fn per_repeat(&self, label: &str, f: impl Fn(&FilterRun) -> f64) -> Vec<f64> {
        self.records
            .iter()
            .filter_map(|r| r.filter(label).map(&f))
            .collect()
    }

    pub fn summaries(&self) -> Vec<FilterSummary> {
        let burn_in = self.config.metrics.burn_in;
        self.config
            .filters
            .iter()
            .map(|f| {
                let label = f.label();
                let (rmse_mean, rmse_stderr) =
                    mean_and_stderr(&self.per_repeat(&label, |r| r.rmse_after(burn_in)));
                let (terminal_mean, terminal_stderr) =
                    mean_and_stderr(&self.per_repeat(&label, FilterRun::terminal_smoothed_rmse));
                FilterSummary {
                    label,
                    rmse_after_burn_in: rmse_mean,
                    rmse_after_burn_in_stderr: rmse_stderr,
                    terminal_smoothed_rmse: terminal_mean,
                    terminal_smoothed_rmse_stderr: terminal_stderr,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSummary {
    pub label: String,
    pub rmse_after_burn_in: f64,
    pub rmse_after_burn_in_stderr: f64,
    pub terminal_smoothed_rmse: f64,
    pub terminal_smoothed_rmse_stderr: f64,
}

/// Default initial-ensemble spread: root mean observation-noise variance.
pub fn observation_noise_scale(model: &dyn StateSpaceModel) -> f64 {
    let cov = model.obs_noise().cov();
    (cov.diagonal().sum() / cov.nrows() as f64).sqrt()
}

/// `count` particles `center + spread · ξ`; particle `i` draws from `rng.child(i)`,
/// so ensembles of different sizes share their leading particles.
pub fn initial_ensemble(
    center: &[f64],
    spread: f64,
    count: usize,
    rng: RngStream,
) -> Result<Ensemble> {
    let mut out = Vec::with_capacity(count * center.len());
    for i in 0..count {
        let mut r = rng.child(i as u64).rng();
        for c in center {
            let xi: f64 = StandardNormal.sample(&mut r);
            out.push(c + spread * xi);
        }
    }
    Ensemble::new(out, center.len())
}

/// Truth start after discarding the spin-up transitions.
pub fn spun_up_state(
    model: &dyn StateSpaceModel,
    x0: &[f64],
    steps: usize,
    rng: RngStream,
) -> Result<Vec<f64>> {
    let mut x = x0.to_vec();
    let mut next = vec![0.0; x.len()];
    for i in 0..steps {
        model.propagate(&x, &mut rng.child(i as u64).rng(), &mut next);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::ModelDiverged);
        }
        std::mem::swap(&mut x, &mut next);
    }
    Ok(x)
}

fn run_repeat(
    cfg: &ExperimentConfig,
    model: &dyn StateSpaceModel,
    hash: &str,
    repeat: usize,
) -> Result<RunRecord> {
    let started = Instant::now();
    let base = RngStream::new(cfg.seed, repeat as u64);
    let truth_rng = base.child(purpose::TRUTH);
    let x0 = spun_up_state(
        model,
        &cfg.initial_state(),
        cfg.spin_up_steps(),
        truth_rng.child(purpose::INIT),
    )?;
    let trajectory = simulate_trajectory(model, &x0, cfg.steps, truth_rng)?;
    let spread = cfg
        .truth
        .init_spread
        .unwrap_or_else(|| observation_noise_scale(model));
    let mut filters = Vec::with_capacity(cfg.filters.len());
    for (k, entry) in cfg.filters.iter().enumerate() {
        let label = entry.label();
        let init = initial_ensemble(
            &x0,
            spread,
            entry.params.ensemble_size,
            base.child(purpose::INIT),
        )?;
        let rng = base.child(FILTER_KEY).child(k as u64);
        let trace = run_filter(
            entry.method,
            model,
            &entry.params,
            &init,
            &trajectory,
            rng,
            false,
        )
        .map_err(|e| Error::Config(format!("filter {label}: {e}")))?;
        filters.push(FilterRun {
            label,
            method: entry.method,
            means: trace.steps.into_iter().map(|s| s.mean).collect(),
            smoothed_rmse: smoothed_rmse(&trace.rmse, cfg.metrics.smoothing_window)?,
            rmse: trace.rmse,
        });
    }
    Ok(RunRecord {
        repeat,
        seed: cfg.seed,
        config_hash: hash.to_string(),
        trajectory,
        filters,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    })
}

/// Run every repeat; repeat `r` simulates its truth from `(seed, r)` and all
/// filters consume that same observation sequence. A failing repeat is
/// reported and the others continue.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let model = cfg.model.build()?;
    let hash = config_hash(cfg)?;
    let outcomes: Vec<Result<RunRecord>> = (0..cfg.repeats)
        .into_par_iter()
        .map(|r| run_repeat(cfg, model.as_ref(), &hash, r))
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (repeat, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(rec) => records.push(rec),
            Err(e) => failures.push(RepeatFailure {
                repeat,
                message: e.to_string(),
            }),
        }
    }
    Ok(ExperimentResult {
        config: cfg.clone(),
        config_hash: hash,
        records,
        failures,
    })
}
