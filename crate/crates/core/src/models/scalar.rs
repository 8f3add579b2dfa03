//! One-dimensional benchmark dynamics: the sine map and the double well.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{GaussianObsNoise, StateSpaceModel};
use crate::rng::Rng;

/// `X_{j+1} = α sin(X_j) + σ ξ`, `Y_{j+1} = X_{j+1} + γ w`.
#[derive(Debug, Clone)]
pub struct SineModel {
    pub alpha: f64,
    pub proc_sigma: f64,
    pub obs_gamma: f64,
    noise: GaussianObsNoise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SineParams {
    pub alpha: f64,
    pub proc_sigma: f64,
    pub obs_gamma: f64,
}

impl Default for SineParams {
    fn default() -> Self {
        Self {
            alpha: 2.5,
            proc_sigma: 0.2,
            obs_gamma: 1.0,
        }
    }
}

impl SineModel {
    pub fn new(p: SineParams) -> Result<Self> {
        if !(p.obs_gamma > 0.0) || !(p.proc_sigma >= 0.0) || !p.alpha.is_finite() {
            return Err(Error::invalid(
                "sine model needs obs_gamma > 0 and proc_sigma >= 0",
            ));
        }
        Ok(Self {
            alpha: p.alpha,
            proc_sigma: p.proc_sigma,
            obs_gamma: p.obs_gamma,
            noise: GaussianObsNoise::isotropic(1, p.obs_gamma * p.obs_gamma)?,
        })
    }
}

/// The Example-1 model with `α = 2.5`, `σ = 0.2`, `γ = 1`.
pub fn sine_model() -> SineModel {
    SineModel::new(SineParams::default()).expect("default parameters are valid")
}

impl StateSpaceModel for SineModel {
    fn state_dim(&self) -> usize {
        1
    }

    fn obs_dim(&self) -> usize {
        1
    }

    fn propagate(&self, x: &[f64], rng: &mut Rng, out: &mut [f64]) {
        let xi: f64 = StandardNormal.sample(rng);
        out[0] = self.alpha * x[0].sin() + self.proc_sigma * xi;
    }

    fn observe_mean(&self, x: &[f64], out: &mut [f64]) {
        out[0] = x[0];
    }

    fn obs_noise(&self) -> &GaussianObsNoise {
        &self.noise
    }

    fn gaussian_transition(&self, x: &[f64], mean: &mut [f64]) -> Option<Vec<f64>> {
        (self.proc_sigma > 0.0).then(|| {
            mean[0] = self.alpha * x[0].sin();
            vec![self.proc_sigma * self.proc_sigma]
        })
    }

    fn linear_obs_diag(&self) -> Option<Vec<f64>> {
        Some(vec![1.0])
    }

    fn name(&self) -> String {
        "sine".into()
    }
}

/// `-4x(x² - 1)`.
pub fn double_well_drift(x: f64) -> f64 {
    -4.0 * x * (x * x - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DoubleWellParams {
    pub dt: f64,
    pub beta: f64,
    pub obs_var: f64,
    /// The truth is negated every `switch_period` steps; 0 disables switching.
    pub switch_period: usize,
}

impl Default for DoubleWellParams {
    fn default() -> Self {
        Self {
            dt: 0.1,
            beta: 0.3,
            obs_var: 0.1,
            switch_period: 40,
        }
    }
}

/// Euler–Maruyama double well `S_{n+1} = S_n - 4S_n(S_n² - 1)Δt + β√Δt ω_n`,
/// observed as `S + N(0, obs_var)`. The filters see the unswitched dynamics.
#[derive(Debug, Clone)]
pub struct DoubleWellModel {
    pub params: DoubleWellParams,
    noise: GaussianObsNoise,
}

impl DoubleWellModel {
    pub fn new(params: DoubleWellParams) -> Result<Self> {
        if !(params.dt > 0.0) || !(params.beta >= 0.0) {
            return Err(Error::invalid("double well needs dt > 0 and beta >= 0"));
        }
        Ok(Self {
            noise: GaussianObsNoise::isotropic(1, params.obs_var)?,
            params,
        })
    }

    fn step(&self, x: f64, rng: &mut Rng) -> f64 {
        let p = &self.params;
        let xi: f64 = StandardNormal.sample(rng);
        x + double_well_drift(x) * p.dt + p.beta * p.dt.sqrt() * xi
    }
}

impl StateSpaceModel for DoubleWellModel {
    fn state_dim(&self) -> usize {
        1
    }

    fn obs_dim(&self) -> usize {
        1
    }

    fn propagate(&self, x: &[f64], rng: &mut Rng, out: &mut [f64]) {
        out[0] = self.step(x[0], rng);
    }

    fn observe_mean(&self, x: &[f64], out: &mut [f64]) {
        out[0] = x[0];
    }

    fn obs_noise(&self) -> &GaussianObsNoise {
        &self.noise
    }

    fn truth_step(&self, step: usize, x: &[f64], rng: &mut Rng, out: &mut [f64]) {
        out[0] = self.step(x[0], rng);
        let period = self.params.switch_period;
        if period > 0 && step % period == 0 {
            out[0] = -out[0];
        }
    }

    fn gaussian_transition(&self, x: &[f64], mean: &mut [f64]) -> Option<Vec<f64>> {
        let p = &self.params;
        (p.beta > 0.0).then(|| {
            mean[0] = x[0] + double_well_drift(x[0]) * p.dt;
            vec![p.beta * p.beta * p.dt]
        })
    }

    fn linear_obs_diag(&self) -> Option<Vec<f64>> {
        Some(vec![1.0])
    }

    fn name(&self) -> String {
        "double_well".into()
    }
}
