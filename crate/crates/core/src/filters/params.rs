use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::DriftEvaluation;

/// Starting point of the analysis bridge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorMode {
    /// Every particle starts at the origin.
    Zero,
    /// Every particle starts at the prior ensemble mean.
    #[default]
    PriorMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resampling {
    #[default]
    Systematic,
    Multinomial,
}

/// Proposal `Q(X_{j+1} | X_j, y)` of the importance-sampling bridge filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Proposal {
    /// The model transition itself; the importance correction is identically one.
    PriorTransition,
    /// Gaussian transition whose mean is moved toward the observation by a
    /// fraction `gain` of the per-coordinate Kalman correction, with the
    /// variance shrunk by the same fraction. `gain = 1` is the exact
    /// conditional transition of a linear-Gaussian model.
    Nudged { gain: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterParams {
    /// Ensemble size `B`.
    pub ensemble_size: usize,
    /// Euler steps `N` per analysis bridge.
    pub euler_steps: usize,
    /// Bridge horizon `T`.
    pub horizon: f64,
    pub anchor: AnchorMode,
    /// Diffusion coefficient of the analysis bridge.
    pub sb_sigma: f64,
    pub resampling: Resampling,
    pub proposal: Option<Proposal>,
    /// Raise log-weights to at least `max - weight_floor` instead of failing on
    /// degenerate weights.
    pub weight_floor: Option<f64>,
    /// Bridge time clamp; `Δτ/2` when absent.
    pub t_clamp: Option<f64>,
    pub drift_evaluation: DriftEvaluation,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            ensemble_size: 500,
            euler_steps: 100,
            horizon: 1.0,
            anchor: AnchorMode::PriorMean,
            sb_sigma: 1.0,
            resampling: Resampling::Systematic,
            proposal: None,
            weight_floor: None,
            t_clamp: None,
            drift_evaluation: DriftEvaluation::Auto,
        }
    }
}

impl FilterParams {
    pub fn new(ensemble_size: usize, euler_steps: usize) -> Self {
        Self {
            ensemble_size,
            euler_steps,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ensemble_size < 2 {
            return Err(Error::Config("ensemble_size must be at least 2".into()));
        }
        if self.euler_steps < 1 {
            return Err(Error::Config("euler_steps must be at least 1".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config("horizon must be positive".into()));
        }
        if !(self.sb_sigma > 0.0 && self.sb_sigma.is_finite()) {
            return Err(Error::Config("sb_sigma must be positive".into()));
        }
        if let Some(f) = self.weight_floor {
            if !(f > 0.0) {
                return Err(Error::Config("weight_floor must be positive".into()));
            }
        }
        if let Some(e) = self.t_clamp {
            if !(e > 0.0 && e < self.horizon) {
                return Err(Error::Config("t_clamp must lie in (0, horizon)".into()));
            }
        }
        if let Some(Proposal::Nudged { gain }) = self.proposal {
            if !(0.0..=1.0).contains(&gain) {
                return Err(Error::Config(
                    "nudged proposal gain must lie in [0, 1]".into(),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_and_unknown_keys() {
        let p: FilterParams = serde_json::from_str(
            r#"{"ensemble_size": 20, "anchor": "zero", "proposal": {"kind": "nudged", "gain": 0.5}}"#,
        )
        .unwrap();
        assert_eq!(p.ensemble_size, 20);
        assert_eq!(p.euler_steps, 100);
        assert_eq!(p.anchor, AnchorMode::Zero);
        assert_eq!(p.proposal, Some(Proposal::Nudged { gain: 0.5 }));
        assert!(serde_json::from_str::<FilterParams>(r#"{"ensemble_sise": 3}"#).is_err());
    }

    #[test]
    fn validation() {
        assert!(FilterParams::new(1, 10).validate().is_err());
        assert!(FilterParams::new(10, 0).validate().is_err());
        assert!(FilterParams::new(10, 10).validate().is_ok());
        let mut p = FilterParams::new(10, 10);
        p.proposal = Some(Proposal::Nudged { gain: 1.5 });
        assert!(p.validate().is_err());
    }
}
