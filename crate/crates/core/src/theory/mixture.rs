//! Isotropic Gaussian mixtures.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::sde::{transition_moments, LinearSde};
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::weights::log_sum_exp;

/// `Σ_k w_k N(m_k, v_k I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    means: Ensemble,
    vars: Vec<f64>,
}

impl GaussianMixture {
    pub fn new(weights: Vec<f64>, means: Ensemble, vars: Vec<f64>) -> Result<Self> {
        let k = means.len();
        if weights.len() != k || vars.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: if weights.len() != k {
                    weights.len()
                } else {
                    vars.len()
                },
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("mixture weights must be non-negative"));
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("mixture weights must sum to 1"));
        }
        if vars.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("component variances must be positive"));
        }
        Ok(Self {
            weights,
            means,
            vars,
        })
    }

    /// All components share the variance `var`.
    pub fn isotropic(weights: Vec<f64>, means: Ensemble, var: f64) -> Result<Self> {
        let k = means.len();
        Self::new(weights, means, vec![var; k])
    }

    /// Equal weights, shared variance.
    pub fn uniform(means: Ensemble, var: f64) -> Result<Self> {
        let k = means.len();
        Self::isotropic(vec![1.0 / k as f64; k], means, var)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.means.dim()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &Ensemble {
        &self.means
    }

    pub fn vars(&self) -> &[f64] {
        &self.vars
    }

    /// The same mixture with `extra` added to every component variance.
    pub fn widened(&self, extra: f64) -> Result<Self> {
        Self::new(
            self.weights.clone(),
            self.means.clone(),
            self.vars.iter().map(|v| v + extra).collect(),
        )
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    // log w_k + log N(x; m_k, v_k I)
    fn component_logs(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim() as f64;
        self.means
            .particles()
            .zip(&self.weights)
            .zip(&self.vars)
            .map(|((m, w), v)| {
                let r2: f64 = x.iter().zip(m).map(|(a, b)| (a - b) * (a - b)).sum();
                w.ln() - r2 / (2.0 * v) - 0.5 * d * (2.0 * std::f64::consts::PI * v).ln()
            })
            .collect()
    }

    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        log_sum_exp(&self.component_logs(x))
    }

    /// `∇ log p(x)`: responsibility-weighted sum of `-(x - m_k)/v_k`.
    pub fn score(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let logs = self.component_logs(x);
        let total = log_sum_exp(&logs)?;
        let mut out = vec![0.0; x.len()];
        if total == f64::NEG_INFINITY {
            // every component underflowed: fall back to the nearest one
            let k = self
                .means
                .particles()
                .zip(&self.vars)
                .map(|(m, v)| x.iter().zip(m).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / v)
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(k, _)| k)
                .unwrap();
            let m = self.means.particle(k);
            for (o, (xi, mi)) in out.iter_mut().zip(x.iter().zip(m)) {
                *o = -(xi - mi) / self.vars[k];
            }
            return Ok(out);
        }
        for ((l, m), v) in logs.iter().zip(self.means.particles()).zip(&self.vars) {
            let r = (l - total).exp();
            for (o, (xi, mi)) in out.iter_mut().zip(x.iter().zip(m)) {
                *o -= r * (xi - mi) / v;
            }
        }
        Ok(out)
    }

    /// `n` independent draws from one keyed stream.
    pub fn sample(&self, n: usize, rng: RngStream) -> Result<Ensemble> {
        if n == 0 {
            return Err(Error::invalid("sample count must be positive"));
        }
        let mut r = rng.rng();
        let d = self.dim();
        let mut out = Vec::with_capacity(n * d);
        for _ in 0..n {
            let u: f64 = r.random();
            let mut acc = 0.0;
            let mut k = self.len() - 1;
            for (j, w) in self.weights.iter().enumerate() {
                acc += w;
                if u < acc {
                    k = j;
                    break;
                }
            }
            let sd = self.vars[k].sqrt();
            for &m in self.means.particle(k) {
                let xi: f64 = StandardNormal.sample(&mut r);
                out.push(m + sd * xi);
            }
        }
        Ok(Ensemble::from_raw(out, d))
    }
}

/// Law at time `t` of the linear SDE started from the mixture: means scale by
/// `μ_{0,t}` and component variances become `μ²v + σ²_{0,t}`.
pub fn gm_forward_marginal(
    p_data: &GaussianMixture,
    sde: &dyn LinearSde,
    t: f64,
) -> Result<GaussianMixture> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::OutOfDomain {
            t,
            domain: "[0, 1)",
        });
    }
    forward_marginal(p_data, sde, t)
}

// No [0, 1) restriction: the schedule's own domain decides.
pub(crate) fn forward_marginal(
    p_data: &GaussianMixture,
    sde: &dyn LinearSde,
    t: f64,
) -> Result<GaussianMixture> {
    let m = transition_moments(sde, 0.0, t)?;
    let means: Vec<f64> = p_data.means.as_slice().iter().map(|v| v * m.mu).collect();
    Ok(GaussianMixture {
        weights: p_data.weights.clone(),
        means: Ensemble::from_raw(means, p_data.dim()),
        vars: p_data
            .vars
            .iter()
            .map(|v| m.mu * m.mu * v + m.var)
            .collect(),
    })
}

pub fn gm_score(mix: &GaussianMixture, x: &[f64]) -> Result<Vec<f64>> {
    mix.score(x)
}
