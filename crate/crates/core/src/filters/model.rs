//! The state-space model interface shared by every filter.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Additive Gaussian observation noise `ε ~ N(0, Σ)`.
#[derive(Debug, Clone)]
pub struct GaussianObsNoise {
    cov: DMatrix<f64>,
    chol: DMatrix<f64>,
    diag: Option<Vec<f64>>,
}

impl GaussianObsNoise {
    /// Fails unless `cov` is symmetric positive definite.
    pub fn new(cov: DMatrix<f64>) -> Result<Self> {
        let n = cov.nrows();
        if n == 0 || cov.ncols() != n {
            return Err(Error::invalid(
                "observation covariance must be square and non-empty",
            ));
        }
        if cov.iter().any(|v| !v.is_finite())
            || (&cov - cov.transpose()).amax() > 1e-12 * cov.amax()
        {
            return Err(Error::invalid(
                "observation covariance must be finite and symmetric",
            ));
        }
        let chol = Cholesky::new(cov.clone())
            .ok_or_else(|| Error::invalid("observation covariance is not positive definite"))?
            .l();
        let is_diag = (0..n).all(|i| (0..n).all(|j| i == j || cov[(i, j)] == 0.0));
        let diag = is_diag.then(|| cov.diagonal().iter().copied().collect());
        Ok(Self { cov, chol, diag })
    }

    pub fn diagonal(vars: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(vars)))
    }

    /// `scale · I_n`.
    pub fn isotropic(n: usize, var: f64) -> Result<Self> {
        Self::diagonal(&vec![var; n])
    }

    pub fn dim(&self) -> usize {
        self.cov.nrows()
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Lower Cholesky factor of the covariance.
    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// Per-coordinate variances when the covariance is diagonal.
    pub fn diag(&self) -> Option<&[f64]> {
        self.diag.as_deref()
    }

    /// `rᵀ Σ⁻¹ r`.
    pub fn mahalanobis_sq(&self, r: &[f64]) -> f64 {
        if let Some(d) = &self.diag {
            return r.iter().zip(d).map(|(a, v)| a * a / v).sum();
        }
        let z = self
            .chol
            .solve_lower_triangular(&DVector::from_column_slice(r))
            .expect("Cholesky factor has a positive diagonal");
        z.norm_squared()
    }

    pub fn sample(&self, rng: &mut Rng, out: &mut [f64]) {
        let xi: Vec<f64> = (0..self.dim())
            .map(|_| StandardNormal.sample(rng))
            .collect();
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..=i).map(|j| self.chol[(i, j)] * xi[j]).sum();
        }
    }
}

/// `X_{j+1} = f(X_j, ω_j)`, `Y_{j+1} = g(X_{j+1}) + ε_{j+1}` with Gaussian `ε`.
pub trait StateSpaceModel: Sync {
    fn state_dim(&self) -> usize;

    fn obs_dim(&self) -> usize;

    /// One draw of the transition from `x`.
    fn propagate(&self, x: &[f64], rng: &mut Rng, out: &mut [f64]);

    /// The observation operator `g`.
    fn observe_mean(&self, x: &[f64], out: &mut [f64]);

    fn obs_noise(&self) -> &GaussianObsNoise;

    /// Transition used to simulate the truth into step `step`. Models whose
    /// truth deviates from the filter dynamics override this.
    fn truth_step(&self, step: usize, x: &[f64], rng: &mut Rng, out: &mut [f64]) {
        let _ = step;
        self.propagate(x, rng, out);
    }

    /// For a Gaussian transition `N(mean(x), diag(var))`: writes the mean and
    /// returns the variances.
    fn gaussian_transition(&self, _x: &[f64], _mean: &mut [f64]) -> Option<Vec<f64>> {
        None
    }

    /// Coefficients `c` of a coordinatewise linear observation `g(x) = c ⊙ x`.
    fn linear_obs_diag(&self) -> Option<Vec<f64>> {
        None
    }

    fn name(&self) -> String;
}

/// `-½ (g(x) - y)ᵀ Σ⁻¹ (g(x) - y)`, the log-likelihood up to its constant.
pub fn log_likelihood(model: &dyn StateSpaceModel, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != model.state_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.state_dim(),
            found: x.len(),
        });
    }
    if y.len() != model.obs_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.obs_dim(),
            found: y.len(),
        });
    }
    let mut g = vec![0.0; y.len()];
    model.observe_mean(x, &mut g);
    g.iter_mut().zip(y).for_each(|(a, b)| *a -= b);
    Ok(-0.5 * model.obs_noise().mahalanobis_sq(&g))
}

/// `log N(x_next; mean(x), diag(var))` for models with a Gaussian transition.
pub fn transition_log_density(
    model: &dyn StateSpaceModel,
    x: &[f64],
    x_next: &[f64],
) -> Option<f64> {
    let mut mean = vec![0.0; x.len()];
    let var = model.gaussian_transition(x, &mut mean)?;
    Some(gaussian_log_density(x_next, &mean, &var))
}

pub(crate) fn gaussian_log_density(x: &[f64], mean: &[f64], var: &[f64]) -> f64 {
    x.iter()
        .zip(mean)
        .zip(var)
        .map(|((a, m), v)| -0.5 * ((a - m) * (a - m) / v + (2.0 * std::f64::consts::PI * v).ln()))
        .sum()
}

/// `g(x) + ε` with `ε` drawn from `rng`.
pub fn sample_observation(model: &dyn StateSpaceModel, x: &[f64], rng: &mut Rng) -> Vec<f64> {
    let n = model.obs_dim();
    let mut y = vec![0.0; n];
    let mut e = vec![0.0; n];
    model.observe_mean(x, &mut y);
    model.obs_noise().sample(rng, &mut e);
    y.iter_mut().zip(&e).for_each(|(a, b)| *a += b);
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn rejects_bad_covariances() {
        assert!(GaussianObsNoise::diagonal(&[1.0, 0.0]).is_err());
        assert!(
            GaussianObsNoise::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0])).is_err()
        );
        assert!(
            GaussianObsNoise::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err()
        );
    }

    #[test]
    fn mahalanobis_full_and_diagonal_agree() {
        let full =
            GaussianObsNoise::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5])).unwrap();
        let mut forced = full.clone();
        forced.diag = None;
        let r = [1.0, -3.0];
        assert!((full.mahalanobis_sq(&r) - 18.5).abs() < 1e-14);
        assert!((forced.mahalanobis_sq(&r) - 18.5).abs() < 1e-12);
        let corr =
            GaussianObsNoise::new(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        // inverse is [[2, -1], [-1, 2]] / 3
        assert!((corr.mahalanobis_sq(&[1.0, 1.0]) - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn noise_samples_have_the_covariance() {
        let noise =
            GaussianObsNoise::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 2.0])).unwrap();
        let mut rng = RngStream::new(4, 0).rng();
        let n = 50_000;
        let mut acc = [0.0; 3];
        let mut e = [0.0; 2];
        for _ in 0..n {
            noise.sample(&mut rng, &mut e);
            acc[0] += e[0] * e[0];
            acc[1] += e[0] * e[1];
            acc[2] += e[1] * e[1];
        }
        let c = acc.map(|v| v / n as f64);
        assert!(
            (c[0] - 1.0).abs() < 0.03 && (c[1] - 0.6).abs() < 0.03 && (c[2] - 2.0).abs() < 0.06
        );
    }
}
