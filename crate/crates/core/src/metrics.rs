//! Tracking-error metrics.

use crate::error::{Error, Result};

/// Root-mean-square error over coordinates: `sqrt(Σ (e_k - t_k)² / d)`.
pub fn rmse(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: estimate.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::invalid("rmse of empty vectors"));
    }
    let ss: f64 = estimate
        .iter()
        .zip(truth)
        .map(|(e, t)| (e - t) * (e - t))
        .sum();
    Ok((ss / truth.len() as f64).sqrt())
}

/// Trailing moving average: element `j` is the mean of
/// `series[max(0, j + 1 - window)..=j]`.
pub fn smoothed_rmse(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window < 1 {
        return Err(Error::invalid("smoothing window must be at least 1"));
    }
    let mut out = Vec::with_capacity(series.len());
    for j in 0..series.len() {
        let lo = (j + 1).saturating_sub(window);
        let slice = &series[lo..=j];
        out.push(slice.iter().sum::<f64>() / slice.len() as f64);
    }
    Ok(out)
}

/// Pointwise mean across equally long series.
pub fn pointwise_mean(series: &[Vec<f64>]) -> Vec<f64> {
    let Some(first) = series.first() else {
        return Vec::new();
    };
    let mut out = vec![0.0; first.len()];
    for s in series {
        for (o, v) in out.iter_mut().zip(s) {
            *o += v;
        }
    }
    out.iter_mut().for_each(|v| *v /= series.len() as f64);
    out
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert!((rmse(&[3.0, 0.0], &[0.0, 4.0]).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(rmse(&[-2.5], &[4.0]).unwrap(), 6.5);
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn smoothing_examples() {
        assert_eq!(
            smoothed_rmse(&[2.0, 4.0, 6.0], 1).unwrap(),
            vec![2.0, 4.0, 6.0]
        );
        assert_eq!(
            smoothed_rmse(&[2.0, 4.0, 6.0], 2).unwrap(),
            vec![2.0, 3.0, 5.0]
        );
        assert_eq!(smoothed_rmse(&[0.5; 7], 3).unwrap(), vec![0.5; 7]);
        assert!(smoothed_rmse(&[1.0], 0).is_err());
        assert!(smoothed_rmse(&[], 4).unwrap().is_empty());
    }

    #[test]
    fn stderr_of_constant_is_zero() {
        assert_eq!(mean_and_stderr(&[2.0, 2.0, 2.0]), (2.0, 0.0));
        let (m, s) = mean_and_stderr(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn rmse_symmetric_and_zero_iff_equal(
            a in prop::collection::vec(-1e3f64..1e3, 1..10),
            b in prop::collection::vec(-1e3f64..1e3, 1..10),
        ) {
            let n = a.len().min(b.len());
            let (a, b) = (&a[..n], &b[..n]);
            prop_assert_eq!(rmse(a, b).unwrap(), rmse(b, a).unwrap());
            prop_assert_eq!(rmse(a, a).unwrap(), 0.0);
            if a != b {
                prop_assert!(rmse(a, b).unwrap() > 0.0);
            }
        }
    }
}
