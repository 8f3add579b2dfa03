//! Convergence sweeps over the Euler step count or the ensemble size.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::experiment::{run_experiment, FilterRun, RepeatFailure};
use super::presets;
use crate::error::{Error, Result};
use crate::metrics::mean_and_stderr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Euler steps `N` of the analysis bridge.
    EulerSteps,
    /// Ensemble size `B`.
    EnsembleSize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub experiment: ExperimentConfig,
    pub axis: SweepAxis,
    /// Strictly increasing axis values.
    pub values: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        presets::example1_sweep(SweepAxis::EulerSteps, vec![8, 16, 32, 64, 128])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub filter: String,
    pub axis_value: usize,
    /// Mean over repeats of the terminal smoothed RMSE.
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    /// Failed repeats, tagged with the axis value they ran at.
    pub failures: Vec<(usize, RepeatFailure)>,
}

impl SweepTable {
    /// Rows of one filter, in axis order.
    pub fn series(&self, filter: &str) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.filter == filter).collect()
    }
}

/// Runs the experiment once per axis value with that value set on every
/// filter. Seeds are unchanged across values, so rows are paired.
pub fn convergence_sweep(cfg: &SweepConfig) -> Result<SweepTable> {
    if cfg.values.is_empty() || cfg.values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "sweep values must be non-empty and strictly increasing".into(),
        ));
    }
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &value in &cfg.values {
        let mut exp = cfg.experiment.clone();
        for f in &mut exp.filters {
            match cfg.axis {
                SweepAxis::EulerSteps => f.params.euler_steps = value,
                SweepAxis::EnsembleSize => f.params.ensemble_size = value,
            }
        }
        let result = run_experiment(&exp)?;
        for f in &exp.filters {
            let label = f.label();
            let (mean, stderr) =
                mean_and_stderr(&result.per_repeat(&label, FilterRun::terminal_smoothed_rmse));
            rows.push(SweepRow {
                filter: label,
                axis_value: value,
                mean,
                stderr,
            });
        }
        failures.extend(result.failures.into_iter().map(|f| (value, f)));
    }
    rows.sort_by(|a, b| {
        a.filter
            .cmp(&b.filter)
            .then(a.axis_value.cmp(&b.axis_value))
    });
    Ok(SweepTable {
        axis: cfg.axis,
        rows,
        failures,
    })
}

/// Columns `filter, axis_value, mean, stderr`.
pub fn write_sweep_csv(path: &std::path::Path, table: &SweepTable) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["filter", "axis_value", "mean", "stderr"])?;
    for r in &table.rows {
        w.write_record([
            r.filter.clone(),
            r.axis_value.to_string(),
            format!("{}", r.mean),
            format!("{}", r.stderr),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{FilterParams, Method};
    use crate::harness::{run_experiment, FilterEntry};

    fn small() -> SweepConfig {
        let mut experiment = ExperimentConfig {
            filters: vec![FilterEntry::new(Method::Ensbf, FilterParams::new(20, 10))],
            steps: 5,
            repeats: 3,
            ..ExperimentConfig::default()
        };
        experiment.metrics.smoothing_window = 3;
        SweepConfig {
            experiment,
            axis: SweepAxis::EulerSteps,
            values: vec![10],
        }
    }

    #[test]
    fn single_value_matches_the_experiment_aggregate() {
        let cfg = small();
        let table = convergence_sweep(&cfg).unwrap();
        assert_eq!(table.rows.len(), 1);
        let direct = run_experiment(&cfg.experiment).unwrap();
        let (mean, stderr) =
            mean_and_stderr(&direct.per_repeat("ensbf", FilterRun::terminal_smoothed_rmse));
        assert_eq!((table.rows[0].mean, table.rows[0].stderr), (mean, stderr));
    }

    #[test]
    fn rejects_unsorted_values() {
        let mut cfg = small();
        cfg.values = vec![10, 5];
        assert!(convergence_sweep(&cfg).is_err());
        cfg.values = vec![];
        assert!(convergence_sweep(&cfg).is_err());
    }
}
