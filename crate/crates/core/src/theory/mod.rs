//! Linear reference SDEs, Gaussian mixtures and the score/control identity.

mod identity;
mod mixture;
pub mod quad;
mod sde;

pub use identity::{box_grid, check_score_control_identity, linspace};
pub use mixture::{gm_forward_marginal, gm_score, GaussianMixture};
pub use sde::{
    transition_moments, transition_moments_quadrature, vp_schedule, ConstantSde, LinearSde,
    Reversed, TransitionMoments, VpSchedule, QUAD_REL_TOL, VP_T_MAX,
};
