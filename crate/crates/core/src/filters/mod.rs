//! Filters over a common state-space-model interface.
//!
//! Every filtering step receives one [`RngStream`](crate::rng::RngStream) and
//! derives its randomness from children keyed by purpose (prediction,
//! analysis, resampling, perturbation) and particle index. Two filters that
//! share a step stream therefore share their prediction noise, which is what
//! makes the importance-sampling filter with the prior-transition proposal
//! reproduce the plain bridge filter bit for bit.

mod enkf;
mod ensbf;
mod model;
mod params;
mod pf;
mod run;

pub use enkf::{enkf_analysis, enkf_step, ensemble_gain};
pub use ensbf::{
    ensbf_analysis, ensbf_analysis_weighted, ensbf_is_analysis, ensbf_step, likelihood_weights,
    predict, propose,
};
pub use model::{
    log_likelihood, sample_observation, transition_log_density, GaussianObsNoise, StateSpaceModel,
};
pub use params::{AnchorMode, FilterParams, Proposal, Resampling};
pub use pf::{multinomial_resample, pf_step, resample, systematic_resample};
pub use run::{
    check_method, filter_step, run_filter, simulate_trajectory, FilterTrace, Method, Trajectory,
};
