//! Log-space weight arithmetic.
//!
//! Importance weights and bridge-kernel factors are kept as natural logarithms
//! from end to end; only differences from the running maximum are ever
//! exponentiated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unnormalized log-weights (nats). Entries may be `-inf` (zero weight).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogWeights(Vec<f64>);

impl LogWeights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyWeights);
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::invalid("log-weights must be finite or -inf"));
        }
        Ok(Self(values))
    }

    pub fn uniform(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        max_of(&self.0)
    }

    /// Shift so the largest entry is exactly zero.
    pub fn normalized(&self) -> Result<Self> {
        let m = self.max();
        if m == f64::NEG_INFINITY {
            return Err(Error::DegenerateWeights);
        }
        Ok(Self(self.0.iter().map(|v| v - m).collect()))
    }

    /// Raise every entry to at least `max - floor` nats, keeping all particles alive.
    /// An all `-inf` vector becomes uniform.
    pub fn floored(&self, floor: f64) -> Self {
        let m = self.max();
        if m == f64::NEG_INFINITY {
            return Self::uniform(self.len());
        }
        Self(self.0.iter().map(|v| v.max(m - floor)).collect())
    }

    /// Effective sample size `1 / Σ p_i²` of the normalized weights.
    pub fn effective_sample_size(&self) -> Result<f64> {
        let p = normalize_log_weights(self)?;
        Ok(1.0 / p.iter().map(|v| v * v).sum::<f64>())
    }
}

impl From<LogWeights> for Vec<f64> {
    fn from(w: LogWeights) -> Self {
        w.0
    }
}

pub(crate) fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `ln Σ exp(values[i])`, computed around the maximum so it never overflows
/// for finite input.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyWeights);
    }
    let m = max_of(values);
    if m == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let s: f64 = values.iter().map(|v| (v - m).exp()).sum();
    Ok(m + s.ln())
}

/// Softmax of the log-weights: `p_i = exp(lw_i - log_sum_exp(lw))`.
pub fn normalize_log_weights(lw: &LogWeights) -> Result<Vec<f64>> {
    let values = lw.as_slice();
    let m = lw.max();
    if m == f64::NEG_INFINITY {
        return Err(Error::DegenerateWeights);
    }
    let mut p: Vec<f64> = values.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= s);
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn lse_examples() {
        assert_abs_diff_eq!(
            log_sum_exp(&[0.0, 0.0]).unwrap(),
            2f64.ln(),
            epsilon = 1e-15
        );
        assert_eq!(log_sum_exp(&[-3.25]).unwrap(), -3.25);
        assert_eq!(log_sum_exp(&[1e300]).unwrap(), 1e300);
        // 1000.5 + ln(1 + e^-0.5)
        assert_abs_diff_eq!(
            log_sum_exp(&[1000.0, 1000.5]).unwrap(),
            1_000.974_076_984_18,
            epsilon = 1e-9
        );
        assert_eq!(log_sum_exp(&[]), Err(Error::EmptyWeights));
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, 2.0]).unwrap(), 2.0);
    }

    #[test]
    fn normalize_examples() {
        let p = normalize_log_weights(&LogWeights::uniform(4)).unwrap();
        assert_eq!(p, vec![0.25; 4]);

        for c in [-7.0, 0.0, 123.5] {
            let p =
                normalize_log_weights(&LogWeights::new(vec![c, c + 3f64.ln()]).unwrap()).unwrap();
            assert_abs_diff_eq!(p[0], 0.25, epsilon = 1e-14);
            assert_abs_diff_eq!(p[1], 0.75, epsilon = 1e-14);
        }

        let p =
            normalize_log_weights(&LogWeights::new(vec![f64::NEG_INFINITY, 0.0]).unwrap()).unwrap();
        assert_eq!(p, vec![0.0, 1.0]);

        let dead = LogWeights::new(vec![f64::NEG_INFINITY; 3]).unwrap();
        assert_eq!(normalize_log_weights(&dead), Err(Error::DegenerateWeights));
        assert_eq!(LogWeights::new(vec![]), Err(Error::EmptyWeights));
    }

    #[test]
    fn floor_keeps_particles_alive() {
        let w = LogWeights::new(vec![0.0, -1000.0, f64::NEG_INFINITY]).unwrap();
        assert_eq!(w.floored(30.0).as_slice(), &[0.0, -30.0, -30.0]);
        let dead = LogWeights::new(vec![f64::NEG_INFINITY; 2]).unwrap();
        assert_eq!(dead.floored(30.0), LogWeights::uniform(2));
    }

    // Values on a dyadic grid so that adding an integer is exact in binary64.
    fn dyadic() -> impl Strategy<Value = f64> {
        (-(1i64 << 30)..(1i64 << 30)).prop_map(|k| k as f64 / (1u64 << 20) as f64)
    }

    proptest! {
        #[test]
        fn shift_invariance_is_exact(
            lw in prop::collection::vec(dyadic(), 1..40),
            c in -100_000i64..100_000,
        ) {
            let base = normalize_log_weights(&LogWeights::new(lw.clone()).unwrap()).unwrap();
            let shifted: Vec<f64> = lw.iter().map(|v| v + c as f64).collect();
            let moved = normalize_log_weights(&LogWeights::new(shifted).unwrap()).unwrap();
            prop_assert_eq!(base, moved);
        }

        #[test]
        fn normalized_sums_to_one(lw in prop::collection::vec(-700.0f64..700.0, 1..60)) {
            let p = normalize_log_weights(&LogWeights::new(lw).unwrap()).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn lse_is_monotone(
            lw in prop::collection::vec(-50.0f64..50.0, 1..30),
            idx in any::<prop::sample::Index>(),
            bump in 0.0f64..10.0,
        ) {
            let before = log_sum_exp(&lw).unwrap();
            let mut raised = lw.clone();
            let i = idx.index(raised.len());
            raised[i] += bump;
            prop_assert!(log_sum_exp(&raised).unwrap() >= before);
        }
    }
}
