//! Bootstrap particle filter.

use rand::Rng as _;

use super::ensbf::{likelihood_weights, predict};
use super::model::StateSpaceModel;
use super::params::{FilterParams, Resampling};
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::rng::{purpose, Rng, RngStream};
use crate::weights::{normalize_log_weights, LogWeights};

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

/// Systematic resampling: one uniform offset `u ∈ [0, 1)`, positions `(i + u)/n`.
pub fn systematic_resample(p: &[f64], n: usize, u: f64) -> Vec<usize> {
    let cdf = cumulative(p);
    let last = p.len() - 1;
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    for i in 0..n {
        let pos = (i as f64 + u) / n as f64 * cdf[last];
        while k < last && cdf[k] <= pos {
            k += 1;
        }
        // rounding can carry the last position onto trailing zero weights
        let mut j = k;
        while p[j] == 0.0 && j > 0 {
            j -= 1;
        }
        out.push(j);
    }
    out
}

/// `n` independent draws from the categorical distribution `p`.
pub fn multinomial_resample(p: &[f64], n: usize, rng: &mut Rng) -> Vec<usize> {
    let cdf = cumulative(p);
    let total = cdf[cdf.len() - 1];
    (0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * total;
            cdf.partition_point(|c| *c <= u).min(p.len() - 1)
        })
        .collect()
}

/// Resample `n` particles from the weighted ensemble.
pub fn resample(
    ens: &Ensemble,
    lw: &LogWeights,
    n: usize,
    scheme: Resampling,
    rng: RngStream,
) -> Result<Ensemble> {
    if lw.len() != ens.len() {
        return Err(Error::DimensionMismatch {
            expected: ens.len(),
            found: lw.len(),
        });
    }
    let p = normalize_log_weights(lw)?;
    let mut r = rng.rng();
    let idx = match scheme {
        Resampling::Systematic => systematic_resample(&p, n, r.random()),
        Resampling::Multinomial => multinomial_resample(&p, n, &mut r),
    };
    let mut out = Vec::with_capacity(n * ens.dim());
    for i in idx {
        out.extend_from_slice(ens.particle(i));
    }
    Ok(Ensemble::from_raw(out, ens.dim()))
}

/// Predict, weight by the likelihood, resample.
pub fn pf_step(
    posterior: &Ensemble,
    y: &[f64],
    model: &dyn StateSpaceModel,
    params: &FilterParams,
    rng: RngStream,
) -> Result<Ensemble> {
    let prior = predict(model, posterior, rng.child(purpose::PREDICT))?;
    let lw = likelihood_weights(model, &prior, y)?;
    let lw = match params.weight_floor {
        Some(floor) => lw.floored(floor),
        None => lw,
    };
    resample(
        &prior,
        &lw,
        params.ensemble_size,
        params.resampling,
        rng.child(purpose::RESAMPLE),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn systematic_examples() {
        assert_eq!(systematic_resample(&[0.25; 4], 4, 0.5), vec![0, 1, 2, 3]);
        assert_eq!(systematic_resample(&[0.0, 1.0, 0.0], 3, 0.9), vec![1, 1, 1]);
        assert_eq!(
            systematic_resample(&[0.5, 0.0, 0.5], 4, 0.1),
            vec![0, 0, 2, 2]
        );
    }

    #[test]
    fn zero_weight_particles_never_survive() {
        let p = [0.0, 0.3, 0.0, 0.7, 0.0];
        let mut rng = RngStream::new(0, 0).rng();
        for _ in 0..50 {
            let u: f64 = rng.random();
            assert!(systematic_resample(&p, 7, u).iter().all(|i| p[*i] > 0.0));
            assert!(multinomial_resample(&p, 7, &mut rng)
                .iter()
                .all(|i| p[*i] > 0.0));
        }
    }

    #[test]
    fn resampling_keeps_the_weighted_mean_on_average() {
        let ens = Ensemble::new(vec![-2.0, 0.5, 1.0, 4.0, 7.5], 1).unwrap();
        let lw = LogWeights::new(vec![0.0, -1.0, 0.3, -0.2, -3.0]).unwrap();
        let p = normalize_log_weights(&lw).unwrap();
        let target: f64 = p.iter().zip(ens.as_slice()).map(|(a, b)| a * b).sum();
        for scheme in [Resampling::Systematic, Resampling::Multinomial] {
            let means: Vec<f64> = (0..200)
                .map(|k| {
                    resample(&ens, &lw, 5, scheme, RngStream::new(k, 9))
                        .unwrap()
                        .mean()[0]
                })
                .collect();
            let (m, se) = crate::metrics::mean_and_stderr(&means);
            assert!(
                (m - target).abs() < 3.0 * se + 1e-12,
                "{scheme:?}: {m} vs {target} (se {se})"
            );
        }
    }

    proptest! {
        #[test]
        fn systematic_counts_are_within_one_of_expectation(
            raw in prop::collection::vec(0.0f64..1.0, 1..30),
            n in 1usize..100,
            u in 0.0f64..1.0,
        ) {
            let total: f64 = raw.iter().sum();
            prop_assume!(total > 1e-9);
            let p: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let idx = systematic_resample(&p, n, u);
            prop_assert_eq!(idx.len(), n);
            for (k, pk) in p.iter().enumerate() {
                let count = idx.iter().filter(|i| **i == k).count() as f64;
                prop_assert!((count - n as f64 * pk).abs() < 1.0 + 1e-9);
            }
        }
    }
}
