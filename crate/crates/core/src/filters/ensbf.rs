//! Ensemble Schrödinger-bridge filter: prediction, bridge analysis and the
//! importance-sampling variant.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::model::{gaussian_log_density, log_likelihood, StateSpaceModel};
use super::params::{AnchorMode, FilterParams, Proposal};
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::rng::{purpose, RngStream};
use crate::sampler::{sb_generate, DriftSpec, GenSchedule};
use crate::weights::LogWeights;

fn check_state(model: &dyn StateSpaceModel, ens: &Ensemble) -> Result<()> {
    if ens.dim() != model.state_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.state_dim(),
            found: ens.dim(),
        });
    }
    Ok(())
}

/// Push every particle through the model transition; particle `i` draws from `rng.child(i)`.
pub fn predict(
    model: &dyn StateSpaceModel,
    posterior: &Ensemble,
    rng: RngStream,
) -> Result<Ensemble> {
    check_state(model, posterior)?;
    let d = posterior.dim();
    let mut out = vec![0.0; posterior.as_slice().len()];
    out.par_chunks_mut(d).enumerate().for_each(|(i, row)| {
        let mut r = rng.child(i as u64).rng();
        model.propagate(posterior.particle(i), &mut r, row);
    });
    Ensemble::checked(out, d, Error::ModelDiverged)
}

/// `log g̃(x_i)` for every particle.
pub fn likelihood_weights(
    model: &dyn StateSpaceModel,
    ens: &Ensemble,
    y: &[f64],
) -> Result<LogWeights> {
    check_state(model, ens)?;
    let lw = ens
        .particles()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|x| log_likelihood(model, x, y))
        .collect::<Result<Vec<f64>>>()?;
    LogWeights::new(lw)
}

/// Bridge generation from `prior` tilted by `weights`.
pub fn ensbf_analysis_weighted(
    prior: &Ensemble,
    weights: LogWeights,
    params: &FilterParams,
    rng: RngStream,
) -> Result<Ensemble> {
    let weights = match params.weight_floor {
        Some(floor) => weights.floored(floor),
        None => weights,
    };
    let anchor = match params.anchor {
        AnchorMode::Zero => vec![0.0; prior.dim()],
        AnchorMode::PriorMean => prior.mean(),
    };
    let mut spec = DriftSpec::new(prior.clone())
        .with_horizon(params.horizon)?
        .with_anchor(anchor)?
        .with_diffusion_sigma(params.sb_sigma)?
        .with_extra_log_weights(weights)?
        .with_evaluation(params.drift_evaluation)?;
    if let Some(eps) = params.t_clamp {
        spec = spec.with_t_clamp(eps)?;
    }
    let sched = GenSchedule::new(params.euler_steps, params.ensemble_size)?;
    sb_generate(&spec, &sched, rng)
}

/// Bayesian update of `prior` on `y` by the likelihood-weighted bridge.
pub fn ensbf_analysis(
    prior: &Ensemble,
    y: &[f64],
    model: &dyn StateSpaceModel,
    params: &FilterParams,
    rng: RngStream,
) -> Result<Ensemble> {
    let lw = likelihood_weights(model, prior, y)?;
    ensbf_analysis_weighted(prior, lw, params, rng)
}

/// One filtering step: predict with `rng.child(PREDICT)`, analyse with `rng.child(ANALYSIS)`.
pub fn ensbf_step(
    posterior: &Ensemble,
    y: &[f64],
    model: &dyn StateSpaceModel,
    params: &FilterParams,
    rng: RngStream,
) -> Result<Ensemble> {
    let prior = predict(model, posterior, rng.child(purpose::PREDICT))?;
    ensbf_analysis(&prior, y, model, params, rng.child(purpose::ANALYSIS))
}

/// Draws from the proposal and the log importance correction
/// `log P(x̃|x) - log Q(x̃|x, y)` for every particle.
pub fn propose(
    posterior: &Ensemble,
    y: &[f64],
    model: &dyn StateSpaceModel,
    proposal: Proposal,
    rng: RngStream,
) -> Result<(Ensemble, Vec<f64>)> {
    check_state(model, posterior)?;
    let d = posterior.dim();
    let mut probe = vec![0.0; d];
    if model
        .gaussian_transition(posterior.particle(0), &mut probe)
        .is_none()
    {
        return Err(Error::Config(format!(
            "model {} has no transition density, so the importance-sampling filter cannot use it",
            model.name()
        )));
    }
    let coeffs = match proposal {
        Proposal::PriorTransition => None,
        Proposal::Nudged { .. } => {
            let c = model.linear_obs_diag();
            let r = model.obs_noise().diag().map(|v| v.to_vec());
            match (c, r) {
                (Some(c), Some(r)) => Some((c, r)),
                _ => return Err(Error::Config(
                    "nudged proposal needs a coordinatewise linear observation with diagonal noise"
                        .into(),
                )),
            }
        }
    };
    let mut out = vec![0.0; posterior.as_slice().len()];
    let correction = out
        .par_chunks_mut(d)
        .enumerate()
        .map(|(i, row)| {
            let x = posterior.particle(i);
            let mut r = rng.child(i as u64).rng();
            let mut mean = vec![0.0; d];
            let var = model
                .gaussian_transition(x, &mut mean)
                .ok_or_else(|| Error::Config("transition density unavailable".into()))?;
            match (&proposal, &coeffs) {
                (Proposal::Nudged { gain }, Some((c, noise))) => {
                    let mut q_mean = mean.clone();
                    let mut q_var = var.clone();
                    for k in 0..d {
                        let kk = var[k] * c[k] / (c[k] * c[k] * var[k] + noise[k]);
                        q_mean[k] += gain * kk * (y[k] - c[k] * mean[k]);
                        q_var[k] *= 1.0 - gain * kk * c[k];
                    }
                    for k in 0..d {
                        let xi: f64 = StandardNormal.sample(&mut r);
                        row[k] = q_mean[k] + q_var[k].sqrt() * xi;
                    }
                    Ok(gaussian_log_density(row, &mean, &var)
                        - gaussian_log_density(row, &q_mean, &q_var))
                }
                _ => {
                    model.propagate(x, &mut r, row);
                    let lp = gaussian_log_density(row, &mean, &var);
                    let lq = gaussian_log_density(row, &mean, &var);
                    Ok(lp - lq)
                }
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let draws = Ensemble::checked(out, d, Error::ModelDiverged)?;
    Ok((draws, correction))
}

/// Importance-sampling bridge step: proposal draws from `rng.child(PREDICT)`,
/// bridge from `rng.child(ANALYSIS)`, weights
/// `log P(y|x̃) + log P(x̃|x) - log Q(x̃|x, y)`.
pub fn ensbf_is_analysis(
    posterior: &Ensemble,
    y: &[f64],
    model: &dyn StateSpaceModel,
    params: &FilterParams,
    rng: RngStream,
) -> Result<Ensemble> {
    let proposal = params
        .proposal
        .ok_or_else(|| Error::Config("importance-sampling filter needs a proposal".into()))?;
    let (draws, correction) = propose(posterior, y, model, proposal, rng.child(purpose::PREDICT))?;
    let lw = likelihood_weights(model, &draws, y)?;
    let combined: Vec<f64> = lw
        .as_slice()
        .iter()
        .zip(&correction)
        .map(|(a, b)| a + b)
        .collect();
    ensbf_analysis_weighted(
        &draws,
        LogWeights::new(combined)?,
        params,
        rng.child(purpose::ANALYSIS),
    )
}
