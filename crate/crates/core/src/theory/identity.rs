//! Numerical check that the score of a diffused mixture equals the optimal
//! control of the time-reversed linear bridge.

use super::mixture::{forward_marginal, GaussianMixture};
use super::sde::{transition_moments, LinearSde, Reversed};
use crate::error::{Error, Result};

/// `max |score(1 - t, x) - control(t, x)|` over the grid, every coordinate.
///
/// The score side diffuses `p_data` forward to time `1 - t`. The control side is
/// `∇ log ∫ q(t, x, 1, y) p_data(y) dy`, where `q` is the transition density of
/// the SDE with coefficients `-b̃(1-s)` and `σ̃(1-s)`. With `q(t, x, 1, ·) =
/// N(μx, v)` the integral is the mixture widened by `v` evaluated at `μx`, so
/// the control is `μ` times that mixture's score.
pub fn check_score_control_identity(
    p_data: &GaussianMixture,
    sde_forward: &dyn LinearSde,
    t_grid: &[f64],
    x_grid: &[Vec<f64>],
) -> Result<f64> {
    if t_grid.is_empty() || x_grid.is_empty() {
        return Err(Error::invalid("identity check needs a non-empty grid"));
    }
    let reversed = Reversed(sde_forward);
    let mut worst: f64 = 0.0;
    for &t in t_grid {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::OutOfDomain {
                t,
                domain: "[0, 1)",
            });
        }
        let marginal = forward_marginal(p_data, sde_forward, 1.0 - t)?;
        let kernel = transition_moments(&reversed, t, 1.0)?;
        let smoothed = p_data.widened(kernel.var)?;
        for x in x_grid {
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("grid points must be finite"));
            }
            let lhs = marginal.score(x)?;
            let z: Vec<f64> = x.iter().map(|v| kernel.mu * v).collect();
            let rhs = smoothed.score(&z)?;
            for (a, b) in lhs.iter().zip(&rhs) {
                worst = worst.max((a - kernel.mu * b).abs());
            }
        }
    }
    Ok(worst)
}

/// `n` evenly spaced points on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Cartesian product of per-axis points.
pub fn box_grid(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|p| {
                axis.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Ensemble;
    use crate::theory::sde::{vp_schedule, ConstantSde};

    #[test]
    fn standard_gaussian_under_brownian_motion() {
        let g = GaussianMixture::uniform(Ensemble::from_rows(&[[0.0]]).unwrap(), 1.0).unwrap();
        let xs: Vec<Vec<f64>> = linspace(-3.0, 3.0, 7)
            .into_iter()
            .map(|v| vec![v])
            .collect();
        let err = check_score_control_identity(
            &g,
            &ConstantSde::brownian(1.0),
            &linspace(0.0, 0.9, 10),
            &xs,
        )
        .unwrap();
        assert!(err < 1e-10, "{err}");
        // both sides are -x/(2-t)
        let marginal = forward_marginal(&g, &ConstantSde::brownian(1.0), 1.0 - 0.25).unwrap();
        assert!((marginal.score(&[1.5]).unwrap()[0] + 1.5 / 1.75).abs() < 1e-15);
    }

    #[test]
    fn mixture_under_vp() {
        let means =
            Ensemble::from_rows(&[[1.5, 1.0], [1.0, -1.0], [-1.5, 1.0], [-1.0, -1.0]]).unwrap();
        let g = GaussianMixture::uniform(means, 0.04).unwrap();
        let axis = linspace(-2.0, 2.0, 5);
        let xs = box_grid(&[axis.clone(), axis]);
        let err =
            check_score_control_identity(&g, &vp_schedule(), &linspace(0.1, 0.9, 5), &xs).unwrap();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn grid_outside_domain() {
        let g = GaussianMixture::uniform(Ensemble::from_rows(&[[0.0]]).unwrap(), 1.0).unwrap();
        let xs = vec![vec![0.0]];
        assert!(check_score_control_identity(&g, &vp_schedule(), &[1.0], &xs).is_err());
        assert!(check_score_control_identity(&g, &vp_schedule(), &[-0.1], &xs).is_err());
        // t = 0 would need the VP marginal at its singular endpoint
        assert!(check_score_control_identity(&g, &vp_schedule(), &[0.0], &xs).is_err());
        assert!(
            check_score_control_identity(&g, &vp_schedule(), &[0.5], &[vec![f64::NAN]]).is_err()
        );
    }

    #[test]
    fn grids() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(
            box_grid(&[vec![1.0, 2.0], vec![3.0]]),
            vec![vec![1.0, 3.0], vec![2.0, 3.0]]
        );
    }
}
