//! Config-driven experiments: paired repeats, metrics, sweeps and outputs.
//!
//! Repeat `r` of an experiment with seed `s` draws everything from
//! `RngStream::new(s, r)`: the truth from its `TRUTH` child, initial ensembles
//! from `INIT`, and filter `k` from a dedicated child, so every filter sees the
//! same observations and reruns are reproducible bit for bit.

mod config;
mod distance;
mod experiment;
mod generate;
mod identity;
mod output;
mod posterior;
pub mod presets;
mod sweep;

pub use config::{
    config_hash, load_or_default, ExperimentConfig, FilterEntry, LinearGaussianParams,
    MetricsConfig, ModelSpec, TruthConfig,
};
pub use distance::energy_distance;
pub use experiment::{
    initial_ensemble, observation_noise_scale, run_experiment, spun_up_state, ExperimentResult,
    FilterRun, FilterSummary, RepeatFailure, RunRecord,
};
pub use generate::{generate, DatasetSpec, GenerateConfig, GenerateOutput};
pub use identity::{verify_identity, GridAxis, IdentityConfig, IdentityReport, ScheduleSpec};
pub use output::{write_experiment, write_json, write_points_csv};
pub use posterior::{
    posterior_clouds, posterior_test, PosteriorClouds, PosteriorRepeat, PosteriorReport,
    PosteriorTestConfig,
};
pub use sweep::{convergence_sweep, write_sweep_csv, SweepAxis, SweepConfig, SweepRow, SweepTable};
