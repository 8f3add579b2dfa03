//! Energy distance between two particle clouds.

use rayon::prelude::*;

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn mean_cross(a: &Ensemble, b: &Ensemble) -> f64 {
    let total: f64 = (0..a.len())
        .into_par_iter()
        .map(|i| {
            let p = a.particle(i);
            b.particles().map(|q| dist(p, q)).sum::<f64>()
        })
        .sum();
    total / (a.len() * b.len()) as f64
}

// Over all n² ordered pairs; self-pairs add zero.
fn mean_within(a: &Ensemble) -> f64 {
    let n = a.len();
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = a.particle(i);
            (i + 1..n).map(|j| dist(p, a.particle(j))).sum::<f64>()
        })
        .sum();
    2.0 * total / (n * n) as f64
}

/// `2 E|a - b| - E|a - a'| - E|b - b'|` with every expectation an average
/// over all ordered pairs, self-pairs included.
///
/// This is the V-statistic form: it is never negative and is exactly zero when
/// the two clouds are the same multiset. Its bias is `O(1/n)`.
pub fn energy_distance(a: &Ensemble, b: &Ensemble) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(2.0 * mean_cross(a, b) - mean_within(a) - mean_within(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        let a = Ensemble::new(vec![0.0, 1.0], 1).unwrap();
        let b = Ensemble::new(vec![3.0], 1).unwrap();
        // cross mean 2.5, within a = 2/4, within b = 0
        assert_eq!(energy_distance(&a, &b).unwrap(), 4.5);
        assert_eq!(energy_distance(&b, &a).unwrap(), 4.5);
        let shuffled = Ensemble::new(vec![1.0, 0.0], 1).unwrap();
        assert_eq!(energy_distance(&a, &shuffled).unwrap(), 0.0);
        let c = Ensemble::new(vec![0.0, 0.0, 3.0, 4.0], 2).unwrap();
        assert!(energy_distance(&a, &c).is_err());
    }
}
