//! CSV and JSON writers. CSV files carry only seeded results, so identical
//! configs give byte-identical files; timings go to the manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::experiment::ExperimentResult;
use crate::ensemble::Ensemble;
use crate::error::Result;
use crate::metrics::pointwise_mean;

fn num(v: f64) -> String {
    format!("{v}")
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    Ok(csv::Writer::from_path(path)?)
}

/// One row per particle, columns `x_1..x_d`.
pub fn write_points_csv(path: &Path, points: &Ensemble) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record((1..=points.dim()).map(|k| format!("x_{k}")))?;
    for p in points.particles() {
        w.write_record(p.iter().map(|v| num(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a super::ExperimentConfig,
    config_hash: &'a str,
    version: &'static str,
    summaries: Vec<super::FilterSummary>,
    failures: &'a [super::RepeatFailure],
    wall_clock_secs: Vec<f64>,
    files: Vec<String>,
}

/// Writes `truth/repeat_XXX.csv` (`step, truth_*, obs_*`), `rmse.csv`,
/// `smoothed_rmse.csv` (pointwise mean over repeats), `estimates.csv`,
/// `summary.csv` and `manifest.json` under `dir`.
pub fn write_experiment(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let labels: Vec<String> = result.config.filters.iter().map(|f| f.label()).collect();
    let mut files = Vec::new();

    for rec in &result.records {
        let path = dir
            .join("truth")
            .join(format!("repeat_{:03}.csv", rec.repeat));
        let traj = &rec.trajectory;
        let d = traj.truth[0].len();
        let n = traj.obs.first().map_or(0, Vec::len);
        let mut w = writer(&path)?;
        let mut header = vec!["step".to_string()];
        header.extend((1..=d).map(|k| format!("truth_{k}")));
        header.extend((1..=n).map(|k| format!("obs_{k}")));
        w.write_record(&header)?;
        for (j, x) in traj.truth.iter().enumerate() {
            let mut row = vec![j.to_string()];
            row.extend(x.iter().map(|v| num(*v)));
            match j.checked_sub(1).map(|i| &traj.obs[i]) {
                Some(y) => row.extend(y.iter().map(|v| num(*v))),
                None => row.extend(std::iter::repeat(String::new()).take(n)),
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        files.push(path);
    }

    let path = dir.join("rmse.csv");
    let mut w = writer(&path)?;
    let mut header = vec!["repeat".to_string(), "step".to_string()];
    header.extend(labels.iter().cloned());
    w.write_record(&header)?;
    for rec in &result.records {
        for j in 0..result.config.steps {
            let mut row = vec![rec.repeat.to_string(), (j + 1).to_string()];
            row.extend(
                labels
                    .iter()
                    .map(|l| num(rec.filter(l).map_or(f64::NAN, |f| f.rmse[j]))),
            );
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    files.push(path);

    let path = dir.join("smoothed_rmse.csv");
    let mut w = writer(&path)?;
    let mut header = vec!["step".to_string()];
    header.extend(labels.iter().cloned());
    w.write_record(&header)?;
    let averaged: Vec<Vec<f64>> = labels
        .iter()
        .map(|l| {
            let series: Vec<Vec<f64>> = result
                .records
                .iter()
                .filter_map(|r| r.filter(l).map(|f| f.smoothed_rmse.clone()))
                .collect();
            pointwise_mean(&series)
        })
        .collect();
    for j in 0..result.config.steps {
        let mut row = vec![(j + 1).to_string()];
        row.extend(
            averaged
                .iter()
                .map(|s| num(s.get(j).copied().unwrap_or(f64::NAN))),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    files.push(path);

    let path = dir.join("estimates.csv");
    let mut w = writer(&path)?;
    let d = result
        .records
        .first()
        .map_or(0, |r| r.trajectory.truth[0].len());
    let mut header = vec![
        "repeat".to_string(),
        "filter".to_string(),
        "step".to_string(),
    ];
    header.extend((1..=d).map(|k| format!("mean_{k}")));
    w.write_record(&header)?;
    for rec in &result.records {
        for f in &rec.filters {
            for (j, m) in f.means.iter().enumerate() {
                let mut row = vec![rec.repeat.to_string(), f.label.clone(), (j + 1).to_string()];
                row.extend(m.iter().map(|v| num(*v)));
                w.write_record(&row)?;
            }
        }
    }
    w.flush()?;
    files.push(path);

    let summaries = result.summaries();
    let path = dir.join("summary.csv");
    let mut w = writer(&path)?;
    w.write_record([
        "filter",
        "rmse_after_burn_in",
        "rmse_after_burn_in_stderr",
        "terminal_smoothed_rmse",
        "terminal_smoothed_rmse_stderr",
    ])?;
    for s in &summaries {
        w.write_record([
            s.label.clone(),
            num(s.rmse_after_burn_in),
            num(s.rmse_after_burn_in_stderr),
            num(s.terminal_smoothed_rmse),
            num(s.terminal_smoothed_rmse_stderr),
        ])?;
    }
    w.flush()?;
    files.push(path);

    let path = dir.join("manifest.json");
    let manifest = Manifest {
        config: &result.config,
        config_hash: &result.config_hash,
        version: env!("CARGO_PKG_VERSION"),
        summaries,
        failures: &result.failures,
        wall_clock_secs: result.records.iter().map(|r| r.wall_clock_secs).collect(),
        files: files
            .iter()
            .map(|p| p.strip_prefix(dir).unwrap_or(p).display().to_string())
            .collect(),
    };
    write_json(&path, &manifest)?;
    files.push(path);
    Ok(files)
}
