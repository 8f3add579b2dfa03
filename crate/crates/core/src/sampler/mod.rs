//! Training-free Schrödinger–Föllmer bridge sampler.
//!
//! Particles start at an anchor point `a` and follow
//!
//! ```text
//! dV = α(t, V) dt + σ dW,   t ∈ [0, T],
//! ```
//!
//! where the drift is the Monte Carlo estimate built from a data ensemble
//! `{Z_i}` with optional per-sample log-weights `e_i`:
//!
//! ```text
//! ℓ_i(t, x) = -|Z_i - x|² / (2(T - t)) + |Z_i - a|² / (2T) + e_i
//! α(t, x)   = Σ softmax(ℓ)_i (Z_i - x) / (T - t)
//! ```
//!
//! At `t = T` the particles are distributed (up to Euler and Monte Carlo
//! error) as the weighted data ensemble. With `e_i = log g(Z_i)` for a
//! likelihood `g`, the terminal law is the Bayesian posterior of the data
//! ensemble, which is how the filters in [`crate::filters`] use it.

mod sorted;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::weights::{max_of, LogWeights};

pub use sorted::SortedDrift1d;

/// How the drift sum over the data ensemble is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftEvaluation {
    /// Sorted block expansion for one-dimensional data with at least
    /// [`SORTED_MIN_DATA`] samples, direct summation otherwise.
    #[default]
    Auto,
    /// Exact O(M·d) summation per particle.
    Direct,
    /// Block expansion; only valid for one-dimensional data.
    Sorted,
}

/// Data size from which [`DriftEvaluation::Auto`] switches to the sorted evaluator.
pub const SORTED_MIN_DATA: usize = 512;

/// Parameters of the bridge drift.
#[derive(Debug, Clone)]
pub struct DriftSpec {
    data: Ensemble,
    horizon: f64,
    anchor: Vec<f64>,
    diffusion_sigma: f64,
    extra_log_weights: Option<Vec<f64>>,
    t_clamp: Option<f64>,
    evaluation: DriftEvaluation,
    // |Z_i - a|² / 2T + e_i, recomputed whenever a or e changes
    offsets: Vec<f64>,
}

impl DriftSpec {
    /// Horizon 1, anchor at the origin, unit diffusion, no extra weights, no time clamp.
    pub fn new(data: Ensemble) -> Self {
        let anchor = vec![0.0; data.dim()];
        let mut spec = Self {
            data,
            horizon: 1.0,
            anchor,
            diffusion_sigma: 1.0,
            extra_log_weights: None,
            t_clamp: None,
            evaluation: DriftEvaluation::Auto,
            offsets: Vec::new(),
        };
        spec.refresh();
        spec
    }

    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("horizon T must be positive"));
        }
        self.horizon = horizon;
        self.refresh();
        Ok(self)
    }

    pub fn with_anchor(mut self, anchor: Vec<f64>) -> Result<Self> {
        if anchor.len() != self.data.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.data.dim(),
                found: anchor.len(),
            });
        }
        if anchor.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("anchor must be finite"));
        }
        self.anchor = anchor;
        self.refresh();
        Ok(self)
    }

    pub fn with_diffusion_sigma(mut self, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("diffusion sigma must be positive"));
        }
        self.diffusion_sigma = sigma;
        Ok(self)
    }

    /// Per-sample log-weights added to the kernel exponent. They are shifted so
    /// their maximum is zero, which leaves the drift unchanged.
    pub fn with_extra_log_weights(mut self, weights: LogWeights) -> Result<Self> {
        if weights.len() != self.data.len() {
            return Err(Error::DimensionMismatch {
                expected: self.data.len(),
                found: weights.len(),
            });
        }
        self.extra_log_weights = Some(weights.normalized()?.into());
        self.refresh();
        Ok(self)
    }

    /// Evaluate the drift at `min(t, T - eps)` instead of `t`.
    pub fn with_t_clamp(mut self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < self.horizon) {
            return Err(Error::invalid("time clamp must lie in (0, T)"));
        }
        self.t_clamp = Some(eps);
        Ok(self)
    }

    pub fn with_evaluation(mut self, evaluation: DriftEvaluation) -> Result<Self> {
        if evaluation == DriftEvaluation::Sorted && self.data.dim() != 1 {
            return Err(Error::invalid(
                "sorted drift evaluation needs one-dimensional data",
            ));
        }
        self.evaluation = evaluation;
        Ok(self)
    }

    pub fn data(&self) -> &Ensemble {
        &self.data
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn diffusion_sigma(&self) -> f64 {
        self.diffusion_sigma
    }

    pub fn t_clamp(&self) -> Option<f64> {
        self.t_clamp
    }

    /// The normalized extra log-weights, if any.
    pub fn extra_log_weights(&self) -> Option<&[f64]> {
        self.extra_log_weights.as_deref()
    }

    fn refresh(&mut self) {
        let two_t = 2.0 * self.horizon;
        let anchor = &self.anchor;
        self.offsets = self
            .data
            .particles()
            .enumerate()
            .map(|(i, z)| {
                let r2: f64 = z.iter().zip(anchor).map(|(a, b)| (a - b) * (a - b)).sum();
                let extra = self.extra_log_weights.as_ref().map_or(0.0, |e| e[i]);
                r2 / two_t + extra
            })
            .collect();
    }

    /// `min(t, T - eps)` after checking `0 <= t < T`.
    fn effective_time(&self, t: f64) -> Result<f64> {
        if !(t < self.horizon) {
            return Err(Error::TimePastHorizon {
                t,
                horizon: self.horizon,
            });
        }
        if !(t >= 0.0) {
            return Err(Error::invalid("time must be non-negative"));
        }
        Ok(match self.t_clamp {
            Some(eps) => t.min(self.horizon - eps),
            None => t,
        })
    }

    fn uses_sorted(&self) -> bool {
        match self.evaluation {
            DriftEvaluation::Direct => false,
            DriftEvaluation::Sorted => true,
            DriftEvaluation::Auto => self.data.dim() == 1 && self.data.len() >= SORTED_MIN_DATA,
        }
    }
}

/// Euler discretization of the bridge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSchedule {
    pub steps: usize,
    pub samples: usize,
}

impl GenSchedule {
    pub fn new(steps: usize, samples: usize) -> Result<Self> {
        if steps < 1 {
            return Err(Error::invalid("at least one Euler step is required"));
        }
        if samples < 1 {
            return Err(Error::invalid("at least one output sample is required"));
        }
        Ok(Self { steps, samples })
    }

    pub fn step_size(&self, horizon: f64) -> f64 {
        horizon / self.steps as f64
    }
}

/// Log of the bridge kernel factor for one data point, without extra weights:
/// `-|z - x|² / (2(T - t_eff)) + |z - a|² / (2T)`.
pub fn sb_log_kernel(t: f64, x: &[f64], z: &[f64], spec: &DriftSpec) -> Result<f64> {
    let t_eff = spec.effective_time(t)?;
    check_dim(x, spec)?;
    check_dim(z, spec)?;
    let tail = spec.horizon - t_eff;
    let near: f64 = z.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
    let far: f64 = z
        .iter()
        .zip(&spec.anchor)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(-near / (2.0 * tail) + far / (2.0 * spec.horizon))
}

/// Monte Carlo bridge drift at `(t, x)`.
pub fn sb_drift(t: f64, x: &[f64], spec: &DriftSpec) -> Result<Vec<f64>> {
    let t_eff = spec.effective_time(t)?;
    check_dim(x, spec)?;
    let tail = spec.horizon - t_eff;
    let mut mean = vec![0.0; x.len()];
    if spec.uses_sorted() {
        let mut eval = SortedDrift1d::new(spec);
        eval.prepare(tail);
        mean[0] = eval.weighted_mean(x[0])?;
    } else {
        let mut scratch = vec![0.0; spec.data.len()];
        weighted_mean_direct(spec, x, tail, &mut scratch, &mut mean)?;
    }
    Ok(mean.iter().zip(x).map(|(m, xi)| (m - xi) / tail).collect())
}

fn check_dim(v: &[f64], spec: &DriftSpec) -> Result<()> {
    if v.len() != spec.data.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.data.dim(),
            found: v.len(),
        });
    }
    Ok(())
}

/// Softmax-weighted data mean `Σ p_i Z_i` with `p = softmax(offset_i - |Z_i - x|²/(2·tail))`.
fn weighted_mean_direct(
    spec: &DriftSpec,
    x: &[f64],
    tail: f64,
    scratch: &mut [f64],
    out: &mut [f64],
) -> Result<()> {
    let d = x.len();
    let data = spec.data.as_slice();
    let inv = 0.5 / tail;
    if d == 1 {
        let x0 = x[0];
        for ((l, z), c) in scratch.iter_mut().zip(data).zip(&spec.offsets) {
            let r = z - x0;
            *l = c - r * r * inv;
        }
    } else {
        for ((l, z), c) in scratch
            .iter_mut()
            .zip(data.chunks_exact(d))
            .zip(&spec.offsets)
        {
            let r2: f64 = z.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            *l = c - r2 * inv;
        }
    }
    let top = max_of(scratch);
    if top == f64::NEG_INFINITY {
        return Err(Error::DegenerateWeights);
    }
    let mut total = 0.0;
    out.iter_mut().for_each(|v| *v = 0.0);
    if d == 1 {
        let mut acc = 0.0;
        for (l, z) in scratch.iter().zip(data) {
            let w = (l - top).exp();
            total += w;
            acc += w * z;
        }
        out[0] = acc;
    } else {
        for (l, z) in scratch.iter().zip(data.chunks_exact(d)) {
            let w = (l - top).exp();
            total += w;
            for (o, zk) in out.iter_mut().zip(z) {
                *o += w * zk;
            }
        }
    }
    out.iter_mut().for_each(|v| *v /= total);
    Ok(())
}

/// Run the Euler–Maruyama bridge from the anchor and return the terminal particles.
///
/// Particle `ι` draws its increments from `rng.child(ι)`, so the output does not
/// depend on thread scheduling. When the spec has no time clamp, `Δτ/2` is used.
pub fn sb_generate(spec: &DriftSpec, sched: &GenSchedule, rng: RngStream) -> Result<Ensemble> {
    let d = spec.data.dim();
    let horizon = spec.horizon;
    let dt = sched.step_size(horizon);
    let eps = spec.t_clamp.unwrap_or(0.5 * dt);
    let noise = spec.diffusion_sigma * dt.sqrt();

    let mut states: Vec<f64> = spec.anchor.repeat(sched.samples);
    let mut rngs: Vec<_> = (0..sched.samples as u64)
        .map(|i| rng.child(i).rng())
        .collect();
    let sorted = spec.uses_sorted();
    let mut sorted_eval = sorted.then(|| SortedDrift1d::new(spec));

    for step in 0..sched.steps {
        let t = step as f64 * dt;
        let tail = horizon - t.min(horizon - eps);
        let failed = if let Some(eval) = sorted_eval.as_mut() {
            eval.prepare(tail);
            let eval = &*eval;
            states
                .par_iter_mut()
                .zip(rngs.par_iter_mut())
                .map(|(x, r)| {
                    let m = eval.weighted_mean(*x)?;
                    let xi: f64 = StandardNormal.sample(r);
                    *x += (m - *x) / tail * dt + noise * xi;
                    Ok(x.is_finite())
                })
                .collect::<Result<Vec<bool>>>()?
                .contains(&false)
        } else {
            states
                .par_chunks_mut(d)
                .zip(rngs.par_iter_mut())
                .map_init(
                    || (vec![0.0; spec.data.len()], vec![0.0; d]),
                    |(scratch, mean), (x, r)| {
                        weighted_mean_direct(spec, x, tail, scratch, mean)?;
                        let mut ok = true;
                        for (xk, mk) in x.iter_mut().zip(mean.iter()) {
                            let xi: f64 = StandardNormal.sample(r);
                            *xk += (mk - *xk) / tail * dt + noise * xi;
                            ok &= xk.is_finite();
                        }
                        Ok(ok)
                    },
                )
                .collect::<Result<Vec<bool>>>()?
                .contains(&false)
        };
        if failed {
            return Err(Error::Diverged { step });
        }
    }
    Ok(Ensemble::from_raw(states, d))
}
