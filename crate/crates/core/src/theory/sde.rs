//! Scalar linear reference SDEs `dX = b(t) X dt + σ(t) dW` and their Gaussian
//! transition moments.

use serde::{Deserialize, Serialize};

use super::quad::integrate;
use crate::error::{Error, Result};

/// Relative tolerance of the quadrature fallback.
pub const QUAD_REL_TOL: f64 = 1e-10;

/// Largest time at which the VP schedule is evaluated; later times are clamped.
pub const VP_T_MAX: f64 = 1.0 - 1e-4;

/// `X_t | X_{t0} = x ~ N(mu·x, var·I)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionMoments {
    pub mu: f64,
    pub var: f64,
}

impl TransitionMoments {
    pub const IDENTITY: Self = Self { mu: 1.0, var: 0.0 };

    /// Moments of the composed transition `t0 → t1 → t2` (`self` first).
    pub fn then(&self, next: &Self) -> Self {
        Self {
            mu: self.mu * next.mu,
            var: next.mu * next.mu * self.var + next.var,
        }
    }
}

pub trait LinearSde: Sync {
    /// `b(t)`.
    fn drift_coeff(&self, t: f64) -> Result<f64>;

    /// `σ(t)²`.
    fn diffusion_sq(&self, t: f64) -> Result<f64>;

    /// Map a requested time into the evaluation domain, or fail if it lies outside.
    fn clamp_time(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::OutOfDomain {
                t,
                domain: "[0, inf)",
            });
        }
        Ok(t)
    }

    /// Closed-form moments on `[t0, t]`, for schedules that have one.
    fn closed_form(&self, _t0: f64, _t: f64) -> Option<TransitionMoments> {
        None
    }

    fn name(&self) -> String;
}

impl<S: LinearSde + ?Sized> LinearSde for &S {
    fn drift_coeff(&self, t: f64) -> Result<f64> {
        (**self).drift_coeff(t)
    }

    fn diffusion_sq(&self, t: f64) -> Result<f64> {
        (**self).diffusion_sq(t)
    }

    fn clamp_time(&self, t: f64) -> Result<f64> {
        (**self).clamp_time(t)
    }

    fn closed_form(&self, t0: f64, t: f64) -> Option<TransitionMoments> {
        (**self).closed_form(t0, t)
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

/// Time-independent coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantSde {
    pub b: f64,
    pub sigma: f64,
}

impl ConstantSde {
    pub fn brownian(sigma: f64) -> Self {
        Self { b: 0.0, sigma }
    }
}

impl LinearSde for ConstantSde {
    fn drift_coeff(&self, _t: f64) -> Result<f64> {
        Ok(self.b)
    }

    fn diffusion_sq(&self, _t: f64) -> Result<f64> {
        Ok(self.sigma * self.sigma)
    }

    fn closed_form(&self, t0: f64, t: f64) -> Option<TransitionMoments> {
        let h = t - t0;
        let s2 = self.sigma * self.sigma;
        let var = if self.b == 0.0 {
            s2 * h
        } else {
            s2 * (2.0 * self.b * h).exp_m1() / (2.0 * self.b)
        };
        Some(TransitionMoments {
            mu: (self.b * h).exp(),
            var,
        })
    }

    fn name(&self) -> String {
        format!("constant(b={}, sigma={})", self.b, self.sigma)
    }
}

/// Variance-preserving schedule with marginal coefficients `α_t = 1 - t`, `β_t² = t`:
/// `b(t) = -1/(1-t)`, `σ(t)² = 1 + 2t/(1-t)` on `[0, 1)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VpSchedule;

pub fn vp_schedule() -> VpSchedule {
    VpSchedule
}

impl VpSchedule {
    fn check(t: f64) -> Result<()> {
        if (0.0..1.0).contains(&t) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                t,
                domain: "[0, 1)",
            })
        }
    }
}

impl LinearSde for VpSchedule {
    fn drift_coeff(&self, t: f64) -> Result<f64> {
        Self::check(t)?;
        Ok(-1.0 / (1.0 - t))
    }

    fn diffusion_sq(&self, t: f64) -> Result<f64> {
        Self::check(t)?;
        Ok(1.0 + 2.0 * t / (1.0 - t))
    }

    fn clamp_time(&self, t: f64) -> Result<f64> {
        Self::check(t)?;
        Ok(t.min(VP_T_MAX))
    }

    fn closed_form(&self, t0: f64, t: f64) -> Option<TransitionMoments> {
        let r = (1.0 - t) / (1.0 - t0);
        Some(TransitionMoments {
            mu: r,
            var: t - t0 * r * r,
        })
    }

    fn name(&self) -> String {
        "vp".into()
    }
}

/// Time-reversed coefficients `b(t) = -b̃(1-t)`, `σ(t) = σ̃(1-t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reversed<S>(pub S);

impl<S: LinearSde> LinearSde for Reversed<S> {
    fn drift_coeff(&self, t: f64) -> Result<f64> {
        Ok(-self.0.drift_coeff(1.0 - t)?)
    }

    fn diffusion_sq(&self, t: f64) -> Result<f64> {
        self.0.diffusion_sq(1.0 - t)
    }

    fn clamp_time(&self, t: f64) -> Result<f64> {
        if !(t <= 1.0) {
            return Err(Error::OutOfDomain {
                t,
                domain: "(-inf, 1]",
            });
        }
        Ok(1.0 - self.0.clamp_time(1.0 - t)?)
    }

    // The reversed transition on [t0, t] is the forward one on [1-t, 1-t0],
    // inverted: mu = 1/μ̃ and var = σ̃²/μ̃².
    fn closed_form(&self, t0: f64, t: f64) -> Option<TransitionMoments> {
        let fwd = self.0.closed_form(1.0 - t, 1.0 - t0)?;
        Some(TransitionMoments {
            mu: 1.0 / fwd.mu,
            var: fwd.var / (fwd.mu * fwd.mu),
        })
    }

    fn name(&self) -> String {
        format!("reversed({})", self.0.name())
    }
}

/// Transition moments on `[t0, t]`, from the closed form when available.
pub fn transition_moments(sde: &dyn LinearSde, t0: f64, t: f64) -> Result<TransitionMoments> {
    let (a, b) = span(sde, t0, t)?;
    if a == b {
        return Ok(TransitionMoments::IDENTITY);
    }
    match sde.closed_form(a, b) {
        Some(m) => Ok(m),
        None => quadrature_moments(sde, a, b),
    }
}

/// Transition moments on `[t0, t]` by nested adaptive quadrature, ignoring any closed form.
pub fn transition_moments_quadrature(
    sde: &dyn LinearSde,
    t0: f64,
    t: f64,
) -> Result<TransitionMoments> {
    let (a, b) = span(sde, t0, t)?;
    if a == b {
        return Ok(TransitionMoments::IDENTITY);
    }
    quadrature_moments(sde, a, b)
}

fn span(sde: &dyn LinearSde, t0: f64, t: f64) -> Result<(f64, f64)> {
    if !(t0 <= t) {
        return Err(Error::invalid(format!(
            "transition needs t0 <= t, got {t0} > {t}"
        )));
    }
    Ok((sde.clamp_time(t0)?, sde.clamp_time(t)?))
}

fn quadrature_moments(sde: &dyn LinearSde, t0: f64, t: f64) -> Result<TransitionMoments> {
    let fail = Error::QuadratureFailed { lo: t0, hi: t };
    let drift_integral = |s: f64| integrate(|r| sde.drift_coeff(r), s, t, QUAD_REL_TOL);
    let log_mu = drift_integral(t0).map_err(|_| fail.clone())?;
    let var = integrate(
        |s| Ok((2.0 * drift_integral(s)?).exp() * sde.diffusion_sq(s)?),
        t0,
        t,
        QUAD_REL_TOL,
    )
    .map_err(|_| fail.clone())?;
    let mu = log_mu.exp();
    if !(mu > 0.0 && mu.is_finite() && var >= 0.0 && var.is_finite()) {
        return Err(fail);
    }
    Ok(TransitionMoments { mu, var })
}
