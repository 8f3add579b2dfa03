//! Benchmark systems, analytic reference distributions and synthetic data.

mod linear;
mod lorenz96;
mod reference;
mod scalar;

pub use linear::LinearGaussianModel;
pub use lorenz96::{lorenz96_drift, Lorenz96Model, Lorenz96Params};
pub use reference::{mixture_posterior_case, moon_point, two_moons, MixturePosteriorCase};
pub use scalar::{
    double_well_drift, sine_model, DoubleWellModel, DoubleWellParams, SineModel, SineParams,
};
