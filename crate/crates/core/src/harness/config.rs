//! Experiment configuration. Every field has a default, unknown keys are
//! rejected, and the parsed value (defaults filled in) is what gets hashed
//! and written to the manifest.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::filters::{check_method, FilterParams, Method, StateSpaceModel};
use crate::models::{
    DoubleWellModel, DoubleWellParams, LinearGaussianModel, Lorenz96Model, Lorenz96Params,
    SineModel, SineParams,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearGaussianParams {
    pub a: Vec<f64>,
    pub q: Vec<f64>,
    pub c: Vec<f64>,
    pub r: Vec<f64>,
}

impl Default for LinearGaussianParams {
    fn default() -> Self {
        Self {
            a: vec![1.0],
            q: vec![0.0],
            c: vec![1.0],
            r: vec![1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ModelSpec {
    Sine(SineParams),
    DoubleWell(DoubleWellParams),
    Lorenz96(Lorenz96Params),
    LinearGaussian(LinearGaussianParams),
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Sine(SineParams::default())
    }
}

impl ModelSpec {
    pub fn build(&self) -> Result<Box<dyn StateSpaceModel>> {
        Ok(match self {
            ModelSpec::Sine(p) => Box::new(SineModel::new(*p)?),
            ModelSpec::DoubleWell(p) => Box::new(DoubleWellModel::new(*p)?),
            ModelSpec::Lorenz96(p) => Box::new(Lorenz96Model::new(p.clone())?),
            ModelSpec::LinearGaussian(p) => Box::new(LinearGaussianModel::new(
                p.a.clone(),
                p.q.clone(),
                p.c.clone(),
                p.r.clone(),
            )?),
        })
    }

    /// Truth start when the config gives none: `1` for the scalar models,
    /// `F` everywhere with the first coordinate nudged by 0.01 for Lorenz-96,
    /// zero for the linear model.
    pub fn default_initial_state(&self) -> Vec<f64> {
        match self {
            ModelSpec::Sine(_) | ModelSpec::DoubleWell(_) => vec![1.0],
            ModelSpec::Lorenz96(p) => {
                let mut x = vec![p.forcing; p.dim];
                x[0] += 0.01;
                x
            }
            ModelSpec::LinearGaussian(p) => vec![0.0; p.a.len()],
        }
    }

    /// Transitions simulated and discarded before step 0 when the config gives none.
    pub fn default_spin_up(&self) -> usize {
        match self {
            ModelSpec::Lorenz96(_) => 100,
            _ => 0,
        }
    }
}

/// How the hidden truth and the initial ensembles are produced.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruthConfig {
    pub initial_state: Option<Vec<f64>>,
    pub spin_up_steps: Option<usize>,
    /// Standard deviation `c` of the initial ensemble around the truth;
    /// the observation noise scale when absent.
    pub init_spread: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterEntry {
    pub method: Method,
    /// Column name in the outputs; the method name when absent.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub params: FilterParams,
}

impl FilterEntry {
    pub fn new(method: Method, params: FilterParams) -> Self {
        Self {
            method,
            label: None,
            params,
        }
    }

    pub fn label(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| self.method.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    pub smoothing_window: usize,
    /// Steps excluded from the post-burn-in RMSE.
    pub burn_in: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            smoothing_window: 20,
            burn_in: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: ModelSpec,
    pub truth: TruthConfig,
    pub filters: Vec<FilterEntry>,
    /// Filtering steps `J`.
    pub steps: usize,
    pub repeats: usize,
    pub seed: u64,
    pub metrics: MetricsConfig,
    /// Output directory; the command line `--out` takes precedence.
    pub out_dir: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            model: ModelSpec::default(),
            truth: TruthConfig::default(),
            filters: vec![
                FilterEntry::new(Method::Ensbf, FilterParams::default()),
                FilterEntry::new(Method::Pf, FilterParams::default()),
                FilterEntry::new(Method::Enkf, FilterParams::default()),
            ],
            steps: 100,
            repeats: 1,
            seed: 0,
            metrics: MetricsConfig::default(),
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<()> {
        let model = self.model.build()?;
        if self.filters.is_empty() {
            return Err(Error::Config("at least one filter is required".into()));
        }
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if self.metrics.smoothing_window == 0 {
            return Err(Error::Config("smoothing_window must be at least 1".into()));
        }
        let mut labels: Vec<String> = self.filters.iter().map(FilterEntry::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("filter labels must be unique".into()));
        }
        for f in &self.filters {
            check_method(f.method, model.as_ref(), &f.params)?;
        }
        if let Some(x0) = &self.truth.initial_state {
            if x0.len() != model.state_dim() {
                return Err(Error::Config(format!(
                    "initial_state has {} entries; the model state has {}",
                    x0.len(),
                    model.state_dim()
                )));
            }
        }
        if let Some(c) = self.truth.init_spread {
            if !(c >= 0.0) {
                return Err(Error::Config("init_spread must be >= 0".into()));
            }
        }
        Ok(())
    }

    /// Parse and validate JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn initial_state(&self) -> Vec<f64> {
        self.truth
            .initial_state
            .clone()
            .unwrap_or_else(|| self.model.default_initial_state())
    }

    pub fn spin_up_steps(&self) -> usize {
        self.truth
            .spin_up_steps
            .unwrap_or_else(|| self.model.default_spin_up())
    }
}

/// Hex SHA-256 of the canonical JSON form of any config.
pub fn config_hash<T: Serialize>(cfg: &T) -> Result<String> {
    let text = serde_json::to_string(cfg)?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

/// Parse a config of any kind from a file, defaulting when no path is given.
pub fn load_or_default<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        Some(p) => Ok(serde_json::from_str(&std::fs::read_to_string(p)?)?),
        None => Ok(T::default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_materialized() {
        let cfg = ExperimentConfig::from_json(r#"{"model": {"kind": "double_well"}}"#).unwrap();
        let ModelSpec::DoubleWell(p) = &cfg.model else {
            panic!("wrong model")
        };
        assert_eq!(p.switch_period, 40);
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"switch_period\":40"));
        assert!(text.contains("\"smoothing_window\":20"));
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::from_json(r#"{"stepz": 3}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"model": {"kind": "sine", "alpah": 2}}"#).is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"filters": [{"method": "pf", "params": {"ensemble_size": 0}}]}"#
        )
        .is_err());
        assert!(ExperimentConfig::from_json(r#"{"filters": [{"method": "ensbf_is"}]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"repeats": 0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"truth": {"initial_state": [1, 2]}}"#).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        b.seed = 1;
        assert_ne!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        assert_eq!(config_hash(&a).unwrap().len(), 64);
    }
}
