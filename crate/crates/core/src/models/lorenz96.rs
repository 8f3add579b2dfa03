//! Stochastic Lorenz-96 with a linear observation.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{GaussianObsNoise, StateSpaceModel};
use crate::rng::Rng;

/// `(x_{i+1} - x_{i-2}) x_{i-1} + F`, indices cyclic, minus `x_i` when `damping`.
pub fn lorenz96_drift(x: &[f64], forcing: f64, damping: bool, out: &mut [f64]) -> Result<()> {
    let d = x.len();
    if d < 4 {
        return Err(Error::invalid("Lorenz-96 needs at least 4 coordinates"));
    }
    for i in 0..d {
        let next = x[(i + 1) % d];
        let prev = x[(i + d - 1) % d];
        let prev2 = x[(i + d - 2) % d];
        out[i] = (next - prev2) * prev + forcing;
        if damping {
            out[i] -= x[i];
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Lorenz96Params {
    pub dim: usize,
    pub forcing: f64,
    /// Euler–Maruyama step.
    pub dt: f64,
    /// Model time between observations; a whole number of `dt` steps.
    pub obs_interval: f64,
    /// Process noise per coordinate; a single entry applies to all.
    pub proc_sigma: Vec<f64>,
    pub obs_alpha: f64,
    /// Observation covariance `obs_cov_scale · I`.
    pub obs_cov_scale: f64,
    pub include_damping: bool,
}

impl Default for Lorenz96Params {
    fn default() -> Self {
        Self {
            dim: 4,
            forcing: 8.0,
            dt: 0.01,
            obs_interval: 0.1,
            proc_sigma: vec![0.1],
            obs_alpha: 0.2,
            obs_cov_scale: 0.04,
            include_damping: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Lorenz96Model {
    pub params: Lorenz96Params,
    substeps: usize,
    sigma: Vec<f64>,
    noise: GaussianObsNoise,
}

impl Lorenz96Model {
    pub fn new(params: Lorenz96Params) -> Result<Self> {
        if params.dim < 4 {
            return Err(Error::invalid("Lorenz-96 needs at least 4 coordinates"));
        }
        if !(params.dt > 0.0 && params.obs_interval > 0.0) {
            return Err(Error::invalid(
                "Lorenz-96 needs positive dt and obs_interval",
            ));
        }
        let ratio = params.obs_interval / params.dt;
        let substeps = ratio.round() as usize;
        if substeps < 1 || (ratio - substeps as f64).abs() > 1e-9 * ratio {
            return Err(Error::invalid(
                "obs_interval must be a whole multiple of dt",
            ));
        }
        let sigma = match params.proc_sigma.len() {
            1 => vec![params.proc_sigma[0]; params.dim],
            n if n == params.dim => params.proc_sigma.clone(),
            n => {
                return Err(Error::invalid(format!(
                    "proc_sigma has {n} entries; expected 1 or {}",
                    params.dim
                )))
            }
        };
        if sigma.iter().any(|s| !(*s >= 0.0)) || params.obs_alpha == 0.0 {
            return Err(Error::invalid(
                "Lorenz-96 needs proc_sigma >= 0 and a nonzero obs_alpha",
            ));
        }
        Ok(Self {
            noise: GaussianObsNoise::isotropic(params.dim, params.obs_cov_scale)?,
            substeps,
            sigma,
            params,
        })
    }

    /// Euler–Maruyama steps per observation interval.
    pub fn substeps(&self) -> usize {
        self.substeps
    }
}

impl StateSpaceModel for Lorenz96Model {
    fn state_dim(&self) -> usize {
        self.params.dim
    }

    fn obs_dim(&self) -> usize {
        self.params.dim
    }

    fn propagate(&self, x: &[f64], rng: &mut Rng, out: &mut [f64]) {
        let p = &self.params;
        let root_dt = p.dt.sqrt();
        let mut drift = vec![0.0; x.len()];
        out.copy_from_slice(x);
        for _ in 0..self.substeps {
            lorenz96_drift(out, p.forcing, p.include_damping, &mut drift)
                .expect("dimension checked");
            for ((o, f), s) in out.iter_mut().zip(&drift).zip(&self.sigma) {
                let xi: f64 = StandardNormal.sample(rng);
                *o += f * p.dt + s * root_dt * xi;
            }
        }
    }

    fn observe_mean(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = self.params.obs_alpha * v;
        }
    }

    fn obs_noise(&self) -> &GaussianObsNoise {
        &self.noise
    }

    // Gaussian only when one Euler step spans the observation interval.
    fn gaussian_transition(&self, x: &[f64], mean: &mut [f64]) -> Option<Vec<f64>> {
        let p = &self.params;
        if self.substeps != 1 || self.sigma.contains(&0.0) {
            return None;
        }
        lorenz96_drift(x, p.forcing, p.include_damping, mean).ok()?;
        for (m, v) in mean.iter_mut().zip(x) {
            *m = v + *m * p.dt;
        }
        Some(self.sigma.iter().map(|s| s * s * p.dt).collect())
    }

    fn linear_obs_diag(&self) -> Option<Vec<f64>> {
        Some(vec![self.params.obs_alpha; self.params.dim])
    }

    fn name(&self) -> String {
        format!("lorenz96(d={})", self.params.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn drift_examples() {
        let mut out = [0.0; 4];
        lorenz96_drift(&[3.0; 4], 8.0, false, &mut out).unwrap();
        assert_eq!(out, [8.0; 4]);
        lorenz96_drift(&[8.0; 4], 8.0, true, &mut out).unwrap();
        assert_eq!(out, [0.0; 4]);
        lorenz96_drift(&[1.0, 2.0, 3.0, 4.0], 8.0, false, &mut out).unwrap();
        assert_eq!(out[0], 4.0);
        assert!(lorenz96_drift(&[1.0; 3], 8.0, false, &mut [0.0; 3]).is_err());
        assert!(Lorenz96Model::new(Lorenz96Params {
            dim: 3,
            ..Default::default()
        })
        .is_err());
        assert!(Lorenz96Model::new(Lorenz96Params {
            obs_interval: 0.015,
            ..Default::default()
        })
        .is_err());
    }

    proptest! {
        #[test]
        fn cyclic_shift_equivariance(x in prop::collection::vec(-10.0f64..10.0, 4..12), damp: bool) {
            let d = x.len();
            let mut rolled = x.clone();
            rolled.rotate_right(1);
            let mut a = vec![0.0; d];
            let mut b = vec![0.0; d];
            lorenz96_drift(&x, 8.0, damp, &mut a).unwrap();
            lorenz96_drift(&rolled, 8.0, damp, &mut b).unwrap();
            a.rotate_right(1);
            prop_assert_eq!(a, b);
        }
    }
}
