//! Static generation: fit-free bridge sampling from a data cloud.

use serde::{Deserialize, Serialize};

use super::config::config_hash;
use super::distance::energy_distance;
use crate::ensemble::Ensemble;
use crate::error::Result;
use crate::models::{mixture_posterior_case, two_moons};
use crate::rng::{purpose, RngStream};
use crate::sampler::{sb_generate, DriftEvaluation, DriftSpec, GenSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum DatasetSpec {
    TwoMoons {
        count: usize,
        noise: f64,
    },
    /// Draws from the four-mode mixture prior.
    Mixture {
        count: usize,
    },
}

impl DatasetSpec {
    pub fn draw(&self, rng: RngStream) -> Result<Ensemble> {
        match *self {
            DatasetSpec::TwoMoons { count, noise } => two_moons(count, noise, rng),
            DatasetSpec::Mixture { count } => mixture_posterior_case().prior.sample(count, rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerateConfig {
    pub dataset: DatasetSpec,
    pub samples: usize,
    pub euler_steps: usize,
    pub horizon: f64,
    pub sigma: f64,
    pub drift_evaluation: DriftEvaluation,
    pub seed: u64,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSpec::TwoMoons {
                count: 1000,
                noise: 0.05,
            },
            samples: 400,
            euler_steps: 1024,
            horizon: 1.0,
            sigma: 1.0,
            drift_evaluation: DriftEvaluation::Auto,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenerateOutput {
    pub data: Ensemble,
    pub samples: Ensemble,
    /// Energy distance from the samples to a fresh draw of the dataset.
    pub energy_to_fresh_data: f64,
    pub config_hash: String,
}

/// Generate from the origin with the data cloud as the target.
pub fn generate(cfg: &GenerateConfig) -> Result<GenerateOutput> {
    let base = RngStream::new(cfg.seed, 0);
    let data = cfg.dataset.draw(base.child(purpose::INIT))?;
    let spec = DriftSpec::new(data.clone())
        .with_horizon(cfg.horizon)?
        .with_diffusion_sigma(cfg.sigma)?
        .with_evaluation(cfg.drift_evaluation)?;
    let samples = sb_generate(
        &spec,
        &GenSchedule::new(cfg.euler_steps, cfg.samples)?,
        base.child(purpose::ANALYSIS),
    )?;
    let fresh = cfg.dataset.draw(base.child(purpose::EXACT))?;
    Ok(GenerateOutput {
        energy_to_fresh_data: energy_distance(&samples, &fresh)?,
        config_hash: config_hash(cfg)?,
        data,
        samples,
    })
}
