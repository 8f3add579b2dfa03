//! Ensemble Schrödinger–Föllmer bridge filtering.
//!
//! The crate turns a cloud of particles into posterior samples by running a
//! training-free Schrödinger–Föllmer bridge whose drift is a Monte Carlo sum
//! over the cloud. Around that sampler it provides:
//!
//! - [`sampler`]: the bridge drift and its Euler–Maruyama generator;
//! - [`theory`]: linear reference SDEs, Gaussian mixtures and a numerical check
//!   of the score/control identity;
//! - [`filters`]: the ensemble bridge filter, its importance-sampling variant,
//!   a bootstrap particle filter and a stochastic EnKF;
//! - [`models`]: the benchmark state-space models;
//! - [`harness`]: configuration, repeated experiments, metrics and CSV output.

// `!(x > 0.0)` is how parameters reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble;
pub mod error;
pub mod filters;
pub mod harness;
pub mod metrics;
pub mod models;
pub mod rng;
pub mod sampler;
pub mod theory;
pub mod weights;

pub use ensemble::{Ensemble, PosteriorSummary};
pub use error::{Error, Result};
pub use rng::RngStream;
pub use weights::{log_sum_exp, normalize_log_weights, LogWeights};
