//! One-step comparison against the exact four-mode mixture posterior.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::config_hash;
use super::distance::energy_distance;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::filters::{enkf_analysis, ensbf_analysis, likelihood_weights, resample, FilterParams};
use crate::models::mixture_posterior_case;
use crate::rng::{purpose, RngStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PosteriorTestConfig {
    /// Shared by all filters: `ensemble_size` is both the prior and the output size.
    pub params: FilterParams,
    pub exact_samples: usize,
    pub repeats: usize,
    pub seed: u64,
    pub include_enkf: bool,
}

impl Default for PosteriorTestConfig {
    fn default() -> Self {
        Self {
            params: FilterParams::new(2500, 100),
            exact_samples: 2500,
            repeats: 10,
            seed: 0,
            include_enkf: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorRepeat {
    pub repeat: usize,
    pub ensbf: f64,
    pub pf: f64,
    pub enkf: Option<f64>,
    pub pf_duplicate_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorReport {
    pub config: PosteriorTestConfig,
    pub config_hash: String,
    pub repeats: Vec<PosteriorRepeat>,
    /// Repeats in which the bridge ensemble is closer to the exact posterior than the PF's.
    pub ensbf_wins: usize,
}

/// Ensembles of one repeat, for plotting.
#[derive(Debug, Clone)]
pub struct PosteriorClouds {
    pub prior: Ensemble,
    pub ensbf: Ensemble,
    pub pf: Ensemble,
    pub enkf: Option<Ensemble>,
    pub exact: Ensemble,
}

/// Draw the prior, update it once with each filter, and sample the exact posterior.
pub fn posterior_clouds(cfg: &PosteriorTestConfig, repeat: usize) -> Result<PosteriorClouds> {
    let case = mixture_posterior_case();
    let model = case.model();
    let b = cfg.params.ensemble_size;
    let base = RngStream::new(cfg.seed, repeat as u64);
    let prior = case.prior.sample(b, base.child(purpose::INIT))?;
    let y = &case.observation;
    let ensbf = ensbf_analysis(
        &prior,
        y,
        &model,
        &cfg.params,
        base.child(purpose::ANALYSIS),
    )?;
    let lw = likelihood_weights(&model, &prior, y)?;
    let pf = resample(
        &prior,
        &lw,
        b,
        cfg.params.resampling,
        base.child(purpose::RESAMPLE),
    )?;
    let enkf = if cfg.include_enkf {
        Some(enkf_analysis(
            &prior,
            y,
            &model,
            base.child(purpose::PERTURB),
        )?)
    } else {
        None
    };
    let exact = case
        .exact_posterior
        .sample(cfg.exact_samples, base.child(purpose::EXACT))?;
    Ok(PosteriorClouds {
        prior,
        ensbf,
        pf,
        enkf,
        exact,
    })
}

pub fn posterior_test(cfg: &PosteriorTestConfig) -> Result<PosteriorReport> {
    cfg.params.validate()?;
    if cfg.repeats == 0 || cfg.exact_samples == 0 {
        return Err(Error::Config(
            "repeats and exact_samples must be positive".into(),
        ));
    }
    let repeats = (0..cfg.repeats)
        .into_par_iter()
        .map(|r| {
            let c = posterior_clouds(cfg, r)?;
            Ok(PosteriorRepeat {
                repeat: r,
                ensbf: energy_distance(&c.ensbf, &c.exact)?,
                pf: energy_distance(&c.pf, &c.exact)?,
                enkf: c
                    .enkf
                    .as_ref()
                    .map(|e| energy_distance(e, &c.exact))
                    .transpose()?,
                pf_duplicate_fraction: c.pf.duplicate_fraction(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ensbf_wins = repeats.iter().filter(|r| r.ensbf < r.pf).count();
    Ok(PosteriorReport {
        config: cfg.clone(),
        config_hash: config_hash(cfg)?,
        repeats,
        ensbf_wins,
    })
}
