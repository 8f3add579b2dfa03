//! Stochastic (perturbed-observation) ensemble Kalman filter.

use nalgebra::{Cholesky, DMatrix};
use rayon::prelude::*;

use super::ensbf::predict;
use super::model::StateSpaceModel;
use super::params::FilterParams;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::rng::{purpose, RngStream};

/// Kalman gain `C_xh (C_hh + Σ)⁻¹` from ensemble moments.
pub fn ensemble_gain(
    model: &dyn StateSpaceModel,
    prior: &Ensemble,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let b = prior.len();
    if b < 2 {
        return Err(Error::invalid(
            "the ensemble Kalman gain needs at least two particles",
        ));
    }
    let d = prior.dim();
    let n = model.obs_dim();
    let mut h = DMatrix::zeros(n, b);
    for (i, x) in prior.particles().enumerate() {
        let mut g = vec![0.0; n];
        model.observe_mean(x, &mut g);
        h.column_mut(i).copy_from_slice(&g);
    }
    let x = DMatrix::from_column_slice(d, b, prior.as_slice());
    let xa = &x - x.column_mean() * DMatrix::from_element(1, b, 1.0);
    let ha = &h - h.column_mean() * DMatrix::from_element(1, b, 1.0);
    let scale = 1.0 / (b - 1) as f64;
    let c_xh = &xa * ha.transpose() * scale;
    let c_hh = &ha * ha.transpose() * scale;
    let s = c_hh + model.obs_noise().cov();
    let chol =
        Cholesky::new(s).ok_or_else(|| Error::invalid("innovation covariance is singular"))?;
    // K = C_xh S⁻¹  ⇔  S Kᵀ = C_xhᵀ
    let gain = chol.solve(&c_xh.transpose()).transpose();
    Ok((gain, h))
}

/// Kalman update of `prior` with one perturbed observation per particle;
/// particle `i` draws its perturbation from `rng.child(i)`.
pub fn enkf_analysis(
    prior: &Ensemble,
    y: &[f64],
    model: &dyn StateSpaceModel,
    rng: RngStream,
) -> Result<Ensemble> {
    if y.len() != model.obs_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.obs_dim(),
            found: y.len(),
        });
    }
    let (gain, h) = ensemble_gain(model, prior)?;
    let d = prior.dim();
    let n = y.len();
    let noise = model.obs_noise();
    let mut out = prior.as_slice().to_vec();
    out.par_chunks_mut(d).enumerate().for_each(|(i, row)| {
        let mut r = rng.child(i as u64).rng();
        let mut eta = vec![0.0; n];
        noise.sample(&mut r, &mut eta);
        let innov: Vec<f64> = (0..n).map(|k| y[k] + eta[k] - h[(k, i)]).collect();
        for (a, xa) in row.iter_mut().enumerate() {
            *xa += (0..n).map(|k| gain[(a, k)] * innov[k]).sum::<f64>();
        }
    });
    Ensemble::checked(out, d, Error::ModelDiverged)
}

/// Predict, then the perturbed-observation update with `rng.child(PERTURB)`.
pub fn enkf_step(
    posterior: &Ensemble,
    y: &[f64],
    model: &dyn StateSpaceModel,
    _params: &FilterParams,
    rng: RngStream,
) -> Result<Ensemble> {
    let prior = predict(model, posterior, rng.child(purpose::PREDICT))?;
    enkf_analysis(&prior, y, model, rng.child(purpose::PERTURB))
}
