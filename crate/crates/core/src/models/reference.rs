//! Analytic reference distributions and synthetic datasets.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::linear::LinearGaussianModel;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::theory::GaussianMixture;

/// Four-mode Gaussian-mixture prior observed directly through isotropic
/// Gaussian noise; the posterior is again a mixture with known parameters.
#[derive(Debug, Clone)]
pub struct MixturePosteriorCase {
    pub prior: GaussianMixture,
    pub observation: Vec<f64>,
    pub obs_var: f64,
    pub exact_posterior: GaussianMixture,
}

impl MixturePosteriorCase {
    pub fn new(
        prior_means: Ensemble,
        prior_std: f64,
        observation: Vec<f64>,
        obs_std: f64,
    ) -> Result<Self> {
        if observation.len() != prior_means.dim() {
            return Err(Error::DimensionMismatch {
                expected: prior_means.dim(),
                found: observation.len(),
            });
        }
        let s2 = prior_std * prior_std;
        let e2 = obs_std * obs_std;
        let prior = GaussianMixture::uniform(prior_means.clone(), s2)?;
        let mut means = Vec::with_capacity(prior_means.as_slice().len());
        let mut logw = Vec::with_capacity(prior_means.len());
        for mu in prior_means.particles() {
            let mut dist = 0.0;
            for (m, y) in mu.iter().zip(&observation) {
                means.push((e2 * m + s2 * y) / (s2 + e2));
                dist += (m - y) * (m - y);
            }
            logw.push(-dist / (2.0 * (s2 + e2)));
        }
        let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = w.iter().sum();
        let exact_posterior = GaussianMixture::isotropic(
            w.iter().map(|v| v / total).collect(),
            Ensemble::new(means, prior_means.dim())?,
            s2 * e2 / (s2 + e2),
        )?;
        Ok(Self {
            prior,
            observation,
            obs_var: e2,
            exact_posterior,
        })
    }

    /// Static state with identity observation and the case's noise.
    pub fn model(&self) -> LinearGaussianModel {
        LinearGaussianModel::static_identity(vec![self.obs_var; self.observation.len()])
            .expect("positive observation variance")
    }
}

/// The Example-3 case: means `(1.5,1)`, `(1,-1)`, `(-1.5,1)`, `(-1,-1)`,
/// `σ = 0.2`, observation `(1.2, 0)` with `ε = 0.25`.
pub fn mixture_posterior_case() -> MixturePosteriorCase {
    let means =
        Ensemble::new(vec![1.5, 1.0, 1.0, -1.0, -1.5, 1.0, -1.0, -1.0], 2).expect("valid means");
    MixturePosteriorCase::new(means, 0.2, vec![1.2, 0.0], 0.25).expect("valid case")
}

/// A noiseless point on one of the two half circles, `θ ∈ [0, π]`:
/// upper `(cos θ, sin θ)`, lower `(1 - cos θ, 0.5 - sin θ)`.
pub fn moon_point(upper: bool, theta: f64) -> [f64; 2] {
    if upper {
        [theta.cos(), theta.sin()]
    } else {
        [1.0 - theta.cos(), 0.5 - theta.sin()]
    }
}

/// `n` points, the first `⌈n/2⌉` on the upper arc, with `θ ~ U[0, π]` and
/// isotropic `N(0, noise²)` jitter.
pub fn two_moons(n: usize, noise: f64, rng: RngStream) -> Result<Ensemble> {
    if n == 0 {
        return Err(Error::invalid("two_moons needs at least one point"));
    }
    if !(noise >= 0.0) {
        return Err(Error::invalid("two_moons noise must be >= 0"));
    }
    let mut r = rng.rng();
    let upper = n.div_ceil(2);
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        let theta = r.random::<f64>() * std::f64::consts::PI;
        let p = moon_point(i < upper, theta);
        for v in p {
            let xi: f64 = StandardNormal.sample(&mut r);
            out.push(v + noise * xi);
        }
    }
    Ensemble::new(out, 2)
}
