//! Sequential filtering over a simulated truth.

use serde::{Deserialize, Serialize};

use super::enkf::enkf_step;
use super::ensbf::{ensbf_is_analysis, ensbf_step};
use super::model::{sample_observation, StateSpaceModel};
use super::params::FilterParams;
use super::pf::pf_step;
use crate::ensemble::{Ensemble, PosteriorSummary};
use crate::error::{Error, Result};
use crate::metrics::rmse;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ensbf,
    EnsbfIs,
    Pf,
    Enkf,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Ensbf => "ensbf",
            Method::EnsbfIs => "ensbf_is",
            Method::Pf => "pf",
            Method::Enkf => "enkf",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hidden states `x_0..x_J` and observations `y_1..y_J` (`obs[j-1]` observes `truth[j]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub truth: Vec<Vec<f64>>,
    pub obs: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.obs.len()
    }
}

/// Simulate `steps` truth transitions from `x0`; step `j` draws from `rng.child(j)`.
pub fn simulate_trajectory(
    model: &dyn StateSpaceModel,
    x0: &[f64],
    steps: usize,
    rng: RngStream,
) -> Result<Trajectory> {
    if x0.len() != model.state_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.state_dim(),
            found: x0.len(),
        });
    }
    let mut truth = vec![x0.to_vec()];
    let mut obs = Vec::with_capacity(steps);
    for j in 1..=steps {
        let mut r = rng.child(j as u64).rng();
        let mut next = vec![0.0; x0.len()];
        model.truth_step(j, &truth[j - 1], &mut r, &mut next);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::ModelDiverged.at_step(j));
        }
        obs.push(sample_observation(model, &next, &mut r));
        truth.push(next);
    }
    Ok(Trajectory { truth, obs })
}

/// One step of `method` from the current posterior.
pub fn filter_step(
    method: Method,
    posterior: &Ensemble,
    y: &[f64],
    model: &dyn StateSpaceModel,
    params: &FilterParams,
    rng: RngStream,
) -> Result<Ensemble> {
    match method {
        Method::Ensbf => ensbf_step(posterior, y, model, params, rng),
        Method::EnsbfIs => ensbf_is_analysis(posterior, y, model, params, rng),
        Method::Pf => pf_step(posterior, y, model, params, rng),
        Method::Enkf => enkf_step(posterior, y, model, params, rng),
    }
}

/// Reject combinations that cannot run before any work is done.
pub fn check_method(
    method: Method,
    model: &dyn StateSpaceModel,
    params: &FilterParams,
) -> Result<()> {
    params.validate()?;
    if method == Method::EnsbfIs {
        if params.proposal.is_none() {
            return Err(Error::Config("ensbf_is needs a proposal".into()));
        }
        let x = vec![0.0; model.state_dim()];
        let mut m = vec![0.0; model.state_dim()];
        if model.gaussian_transition(&x, &mut m).is_none() {
            return Err(Error::Config(format!(
                "ensbf_is needs a transition density, which model {} does not provide",
                model.name()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterTrace {
    pub method: Method,
    pub initial: PosteriorSummary,
    /// Posterior summaries after steps `1..=J`.
    pub steps: Vec<PosteriorSummary>,
    /// RMSE of the posterior mean against the truth at steps `1..=J`.
    pub rmse: Vec<f64>,
    pub weight_floor: Option<f64>,
}

/// Run `method` over the trajectory; step `j` uses `rng.child(j)`.
pub fn run_filter(
    method: Method,
    model: &dyn StateSpaceModel,
    params: &FilterParams,
    initial: &Ensemble,
    traj: &Trajectory,
    rng: RngStream,
    keep_ensembles: bool,
) -> Result<FilterTrace> {
    check_method(method, model, params)?;
    if initial.dim() != model.state_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.state_dim(),
            found: initial.dim(),
        });
    }
    let mut current = initial.clone();
    let mut steps = Vec::with_capacity(traj.steps());
    let mut errors = Vec::with_capacity(traj.steps());
    for (j, y) in (1..).zip(&traj.obs) {
        current = filter_step(method, &current, y, model, params, rng.child(j as u64))
            .map_err(|e| e.at_step(j))?;
        let summary = PosteriorSummary::of(&current, keep_ensembles);
        errors.push(rmse(&summary.mean, &traj.truth[j])?);
        steps.push(summary);
    }
    Ok(FilterTrace {
        method,
        initial: PosteriorSummary::of(initial, keep_ensembles),
        steps,
        rmse: errors,
        weight_floor: params.weight_floor,
    })
}
