//! Grid check of the score/control identity on a Gaussian-mixture target.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::mixture_posterior_case;
use crate::theory::{
    box_grid, check_score_control_identity, linspace, vp_schedule, ConstantSde, LinearSde,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum ScheduleSpec {
    Vp,
    Constant { b: f64, sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentityConfig {
    pub schedule: ScheduleSpec,
    /// One axis per coordinate of the two-dimensional mixture.
    pub space: [GridAxis; 2],
    pub time: GridAxis,
    pub tolerance: f64,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        let axis = GridAxis {
            lo: -2.0,
            hi: 2.0,
            count: 5,
        };
        Self {
            schedule: ScheduleSpec::Vp,
            space: [axis, axis],
            time: GridAxis {
                lo: 0.1,
                hi: 0.9,
                count: 9,
            },
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub config: IdentityConfig,
    pub max_abs_error: f64,
    pub grid_points: usize,
    pub pass: bool,
}

/// Evaluates the identity on the Example-3 prior mixture.
pub fn verify_identity(cfg: &IdentityConfig) -> Result<IdentityReport> {
    if cfg.space.iter().chain([&cfg.time]).any(|a| a.count == 0) {
        return Err(Error::Config("grid axes need at least one point".into()));
    }
    let prior = mixture_posterior_case().prior;
    let vp = vp_schedule();
    let constant;
    let sde: &dyn LinearSde = match cfg.schedule {
        ScheduleSpec::Vp => &vp,
        ScheduleSpec::Constant { b, sigma } => {
            constant = ConstantSde { b, sigma };
            &constant
        }
    };
    let t = linspace(cfg.time.lo, cfg.time.hi, cfg.time.count);
    let x = box_grid(&cfg.space.map(|a| linspace(a.lo, a.hi, a.count)));
    let err = check_score_control_identity(&prior, sde, &t, &x)?;
    Ok(IdentityReport {
        config: cfg.clone(),
        max_abs_error: err,
        grid_points: t.len() * x.len(),
        pass: err < cfg.tolerance,
    })
}
