//! Particle ensembles.
//!
//! An [`Ensemble`] is a `B × d` block of finite reals stored row-major: row `i`
//! is particle `i`, column `k` is state coordinate `k`. Every filtering density
//! in the crate (prior clouds, posterior clouds, the data set handed to the
//! bridge sampler) is carried by this type.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    dim: usize,
    data: Vec<f64>,
}

impl Ensemble {
    /// Build from row-major storage. Fails on empty input, a length that is not
    /// a multiple of `dim`, or any non-finite entry.
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("ensemble dimension must be at least 1"));
        }
        if data.is_empty() {
            return Err(Error::invalid("ensemble must hold at least one particle"));
        }
        if data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len() % dim,
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("ensemble entries must be finite"));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::invalid("ensemble must hold at least one particle"))?;
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(data, dim)
    }

    /// `count` copies of `point`.
    pub fn filled(count: usize, point: &[f64]) -> Result<Self> {
        let mut data = Vec::with_capacity(count * point.len());
        for _ in 0..count {
            data.extend_from_slice(point);
        }
        Self::new(data, point.len())
    }

    /// Skips validation; callers guarantee shape and finiteness.
    pub(crate) fn from_raw(data: Vec<f64>, dim: usize) -> Self {
        debug_assert!(dim > 0 && !data.is_empty() && data.len() % dim == 0);
        Self { dim, data }
    }

    /// Like [`Ensemble::new`] but reports non-finite entries as `err`.
    pub(crate) fn checked(data: Vec<f64>, dim: usize, err: Error) -> Result<Self> {
        if data.iter().all(|v| v.is_finite()) {
            Ok(Self::from_raw(data, dim))
        } else {
            Err(err)
        }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn particle(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn particles(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Coordinate `k` of every particle.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.particles().map(|p| p[k]).collect()
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for p in self.particles() {
            for (acc, v) in m.iter_mut().zip(p) {
                *acc += v;
            }
        }
        let n = self.len() as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    /// Per-coordinate sample variance (denominator `B - 1`; zero for one particle).
    pub fn variance(&self) -> Vec<f64> {
        let n = self.len();
        if n < 2 {
            return vec![0.0; self.dim];
        }
        let mean = self.mean();
        let mut var = vec![0.0; self.dim];
        for p in self.particles() {
            for k in 0..self.dim {
                let d = p[k] - mean[k];
                var[k] += d * d;
            }
        }
        var.iter_mut().for_each(|v| *v /= (n - 1) as f64);
        var
    }

    /// Fraction of particles that duplicate an earlier particle exactly.
    pub fn duplicate_fraction(&self) -> f64 {
        let mut rows: Vec<&[f64]> = self.particles().collect();
        rows.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let unique = 1 + rows.windows(2).filter(|w| w[0] != w[1]).count();
        1.0 - unique as f64 / self.len() as f64
    }

    /// A copy with every particle translated by `shift`.
    pub fn translated(&self, shift: &[f64]) -> Self {
        assert_eq!(shift.len(), self.dim);
        let data = self
            .particles()
            .flat_map(|p| p.iter().zip(shift).map(|(a, b)| a + b))
            .collect();
        Self::from_raw(data, self.dim)
    }
}

/// Mean and per-coordinate variance of an ensemble, optionally with the cloud itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ensemble: Option<Ensemble>,
}

impl PosteriorSummary {
    pub fn of(ensemble: &Ensemble, keep: bool) -> Self {
        Self {
            mean: ensemble.mean(),
            variance: ensemble.variance(),
            ensemble: keep.then(|| ensemble.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Ensemble::new(vec![], 1).is_err());
        assert!(Ensemble::new(vec![1.0, 2.0, 3.0], 2).is_err());
        assert!(Ensemble::new(vec![1.0, f64::NAN], 1).is_err());
        assert!(Ensemble::new(vec![1.0], 0).is_err());
        assert!(Ensemble::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn rows_are_particles() {
        let e = Ensemble::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 9.0]]).unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!(e.dim(), 2);
        assert_eq!(e.particle(1), &[3.0, 4.0]);
        assert_eq!(e.column(1), vec![2.0, 4.0, 9.0]);
        assert_eq!(e.mean(), vec![3.0, 5.0]);
        assert_eq!(e.variance(), vec![4.0, 13.0]);
    }

    #[test]
    fn duplicates() {
        let e = Ensemble::new(vec![1.0, 1.0, 2.0, 1.0], 1).unwrap();
        assert_eq!(e.duplicate_fraction(), 0.5);
        let e = Ensemble::new(vec![1.0, 2.0, 3.0], 1).unwrap();
        assert_eq!(e.duplicate_fraction(), 0.0);
    }
}
