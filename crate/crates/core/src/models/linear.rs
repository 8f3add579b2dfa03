//! Coordinatewise linear-Gaussian model with its exact Kalman recursion.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::filters::{GaussianObsNoise, StateSpaceModel};
use crate::rng::Rng;

/// `X' = a ⊙ X + √q ⊙ ξ`, `Y = c ⊙ X + √r ⊙ w`, all diagonal.
///
/// With `a = 1` and `q = 0` the state is static, which turns a single filter
/// step into a plain Bayesian update of the initial ensemble.
#[derive(Debug, Clone)]
pub struct LinearGaussianModel {
    a: Vec<f64>,
    q: Vec<f64>,
    c: Vec<f64>,
    noise: GaussianObsNoise,
}

impl LinearGaussianModel {
    pub fn new(a: Vec<f64>, q: Vec<f64>, c: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        let d = a.len();
        if d == 0 || q.len() != d || c.len() != d || r.len() != d {
            return Err(Error::invalid(
                "a, q, c and r must share one nonzero length",
            ));
        }
        if q.iter().any(|v| !(*v >= 0.0)) || a.iter().chain(&c).any(|v| !v.is_finite()) {
            return Err(Error::invalid("linear model needs finite a, c and q >= 0"));
        }
        Ok(Self {
            noise: GaussianObsNoise::diagonal(&r)?,
            a,
            q,
            c,
        })
    }

    /// Static state observed directly: `a = 1`, `q = 0`, `c = 1`.
    pub fn static_identity(obs_var: Vec<f64>) -> Result<Self> {
        let d = obs_var.len();
        Self::new(vec![1.0; d], vec![0.0; d], vec![1.0; d], obs_var)
    }

    /// Exact predicted moments.
    pub fn kalman_predict(&self, mean: &[f64], var: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = mean.iter().zip(&self.a).map(|(m, a)| a * m).collect();
        let v = var
            .iter()
            .zip(&self.a)
            .zip(&self.q)
            .map(|((v, a), q)| a * a * v + q)
            .collect();
        (m, v)
    }

    /// Exact posterior moments after observing `y`.
    pub fn kalman_update(&self, mean: &[f64], var: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let r = self.noise.diag().expect("diagonal by construction");
        let mut m = mean.to_vec();
        let mut v = var.to_vec();
        for k in 0..m.len() {
            let gain = var[k] * self.c[k] / (self.c[k] * self.c[k] * var[k] + r[k]);
            m[k] += gain * (y[k] - self.c[k] * mean[k]);
            v[k] *= 1.0 - gain * self.c[k];
        }
        (m, v)
    }
}

impl StateSpaceModel for LinearGaussianModel {
    fn state_dim(&self) -> usize {
        self.a.len()
    }

    fn obs_dim(&self) -> usize {
        self.a.len()
    }

    fn propagate(&self, x: &[f64], rng: &mut Rng, out: &mut [f64]) {
        for k in 0..x.len() {
            out[k] = self.a[k] * x[k];
            if self.q[k] > 0.0 {
                let xi: f64 = StandardNormal.sample(rng);
                out[k] += self.q[k].sqrt() * xi;
            }
        }
    }

    fn observe_mean(&self, x: &[f64], out: &mut [f64]) {
        for k in 0..x.len() {
            out[k] = self.c[k] * x[k];
        }
    }

    fn obs_noise(&self) -> &GaussianObsNoise {
        &self.noise
    }

    fn gaussian_transition(&self, x: &[f64], mean: &mut [f64]) -> Option<Vec<f64>> {
        if self.q.contains(&0.0) {
            return None;
        }
        for k in 0..x.len() {
            mean[k] = self.a[k] * x[k];
        }
        Some(self.q.clone())
    }

    fn linear_obs_diag(&self) -> Option<Vec<f64>> {
        Some(self.c.clone())
    }

    fn name(&self) -> String {
        format!("linear_gaussian(d={})", self.a.len())
    }
}
