use ensbf::filters::{
    check_method, enkf_step, ensbf_analysis, ensbf_analysis_weighted, ensbf_is_analysis,
    ensbf_step, ensemble_gain, likelihood_weights, log_likelihood, pf_step, predict, propose,
    run_filter, simulate_trajectory, FilterParams, Method, Proposal, Trajectory,
};
use ensbf::models::{
    sine_model, LinearGaussianModel, Lorenz96Model, Lorenz96Params, SineModel, SineParams,
};
use ensbf::{Ensemble, LogWeights, RngStream};
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};

fn gaussian_cloud(n: usize, mean: f64, std: f64, seed: u64) -> Ensemble {
    let mut r = RngStream::new(seed, 77).rng();
    let data = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut r);
            mean + std * z
        })
        .collect();
    Ensemble::new(data, 1).unwrap()
}

fn sample_mean_se(e: &Ensemble) -> (f64, f64) {
    let m = e.mean()[0];
    let v = e.variance()[0];
    (m, (v / e.len() as f64).sqrt())
}

#[test]
fn log_likelihood_examples() {
    let m = sine_model();
    assert_eq!(log_likelihood(&m, &[0.0], &[2.0]).unwrap(), -2.0);
    assert_eq!(log_likelihood(&m, &[1.5], &[1.5]).unwrap(), 0.0);
    assert!(log_likelihood(&m, &[0.0, 1.0], &[2.0]).is_err());
}

#[test]
fn noiseless_sine_prediction_is_deterministic() {
    let m = SineModel::new(SineParams {
        proc_sigma: 0.0,
        ..SineParams::default()
    })
    .unwrap();
    let e = Ensemble::new(vec![0.0, std::f64::consts::FRAC_PI_2, -1.0], 1).unwrap();
    let out = predict(&m, &e, RngStream::new(1, 2)).unwrap();
    assert_eq!(out.as_slice(), &[0.0, 2.5, 2.5 * (-1.0f64).sin()]);
}

#[test]
fn prediction_matches_kalman_moments() {
    let m = LinearGaussianModel::new(vec![0.8], vec![0.3], vec![1.0], vec![1.0]).unwrap();
    let prior = gaussian_cloud(40_000, 1.0, 0.5, 1);
    let out = predict(&m, &prior, RngStream::new(2, 0)).unwrap();
    let (pm, pv) = m.kalman_predict(&prior.mean(), &prior.variance());
    let (mean, se) = sample_mean_se(&out);
    assert!((mean - pm[0]).abs() < 4.0 * se);
    assert!((out.variance()[0] / pv[0] - 1.0).abs() < 0.03);
}

/// Conjugate update `N(0,1)` prior, `y = 1`, unit noise: posterior `N(0.5, 0.5)`.
#[test]
fn one_step_updates_match_the_conjugate_posterior() {
    let model = LinearGaussianModel::static_identity(vec![1.0]).unwrap();
    let prior = gaussian_cloud(20_000, 0.0, 1.0, 3);
    let (km, kv) = model.kalman_update(&prior.mean(), &prior.variance(), &[1.0]);
    let params = FilterParams::new(4000, 128);
    let rng = RngStream::new(4, 0);
    let outputs = [
        (
            "ensbf",
            ensbf_step(&prior, &[1.0], &model, &params, rng).unwrap(),
        ),
        ("pf", pf_step(&prior, &[1.0], &model, &params, rng).unwrap()),
        (
            "enkf",
            enkf_step(&prior, &[1.0], &model, &params, rng).unwrap(),
        ),
    ];
    for (name, out) in outputs {
        let (mean, se) = sample_mean_se(&out);
        assert!(
            (mean - km[0]).abs() < 4.0 * se,
            "{name}: mean {mean} vs {}",
            km[0]
        );
        let ratio = out.variance()[0] / kv[0];
        assert!((ratio - 1.0).abs() < 0.1, "{name}: variance ratio {ratio}");
    }
}

#[test]
fn flat_likelihood_leaves_the_prior_unchanged() {
    let prior = gaussian_cloud(5000, 2.0, 0.7, 5);
    let params = FilterParams::new(4000, 128);
    let out = ensbf_analysis_weighted(
        &prior,
        LogWeights::uniform(prior.len()),
        &params,
        RngStream::new(6, 0),
    )
    .unwrap();
    let (mean, se) = sample_mean_se(&out);
    assert!((mean - prior.mean()[0]).abs() < 4.0 * se);
    assert!((out.variance()[0] / prior.variance()[0] - 1.0).abs() < 0.1);
}

#[test]
fn enkf_scalar_gain() {
    let model = LinearGaussianModel::static_identity(vec![0.25]).unwrap();
    let prior = Ensemble::new(vec![-1.0, 0.0, 0.5, 2.5], 1).unwrap();
    let s2 = prior.variance()[0];
    let (gain, _) = ensemble_gain(&model, &prior).unwrap();
    assert!((gain[(0, 0)] - s2 / (s2 + 0.25)).abs() < 1e-14);
    assert!(ensemble_gain(&model, &Ensemble::new(vec![1.0], 1).unwrap()).is_err());
}

#[test]
fn enkf_tracks_the_kalman_filter() {
    let model = LinearGaussianModel::new(
        vec![0.9, 0.5],
        vec![0.2, 0.1],
        vec![1.0, 2.0],
        vec![0.5, 0.3],
    )
    .unwrap();
    let traj = simulate_trajectory(&model, &[1.0, -1.0], 5, RngStream::new(7, 0)).unwrap();
    let init = {
        let a = gaussian_cloud(20_000, 1.0, 0.5, 8);
        let b = gaussian_cloud(20_000, -1.0, 0.5, 9);
        let rows: Vec<Vec<f64>> = a
            .as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| vec![*x, *y])
            .collect();
        Ensemble::from_rows(&rows).unwrap()
    };
    let params = FilterParams::new(20_000, 1);
    let trace = run_filter(
        Method::Enkf,
        &model,
        &params,
        &init,
        &traj,
        RngStream::new(10, 0),
        false,
    )
    .unwrap();
    let (mut m, mut v) = (vec![1.0, -1.0], vec![0.25, 0.25]);
    for (j, y) in traj.obs.iter().enumerate() {
        let (pm, pv) = model.kalman_predict(&m, &v);
        (m, v) = model.kalman_update(&pm, &pv, y);
        let got = &trace.steps[j];
        for k in 0..2 {
            assert!(
                (got.mean[k] - m[k]).abs() < 5.0 * (v[k] / 20_000.0).sqrt() + 1e-3,
                "step {j} coord {k}"
            );
            assert!((got.variance[k] / v[k] - 1.0).abs() < 0.05);
        }
    }
}

#[test]
fn nudged_proposal_with_unit_gain_equalizes_weights_from_a_common_start() {
    let model = LinearGaussianModel::new(vec![0.7], vec![0.4], vec![1.5], vec![0.2]).unwrap();
    let start = Ensemble::filled(200, &[0.3]).unwrap();
    let y = [1.1];
    let (draws, corr) = propose(
        &start,
        &y,
        &model,
        Proposal::Nudged { gain: 1.0 },
        RngStream::new(11, 0),
    )
    .unwrap();
    let lw = likelihood_weights(&model, &draws, &y).unwrap();
    let total: Vec<f64> = lw
        .as_slice()
        .iter()
        .zip(&corr)
        .map(|(a, b)| a + b)
        .collect();
    let spread = total.iter().cloned().fold(f64::MIN, f64::max)
        - total.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 1e-10, "spread {spread}");
    assert!(draws.variance()[0] > 0.0);
}

#[test]
fn importance_sampling_needs_a_density_and_a_proposal() {
    let model = sine_model();
    let mut params = FilterParams::new(10, 5);
    assert!(check_method(Method::EnsbfIs, &model, &params).is_err());
    params.proposal = Some(Proposal::PriorTransition);
    assert!(check_method(Method::EnsbfIs, &model, &params).is_ok());
    let l96 = Lorenz96Model::new(Lorenz96Params::default()).unwrap();
    assert!(check_method(Method::EnsbfIs, &l96, &params).is_err());
    let start = Ensemble::filled(4, &[0.0; 4]).unwrap();
    assert!(ensbf_is_analysis(&start, &[0.0; 4], &l96, &params, RngStream::new(0, 0)).is_err());
}

#[test]
fn runs_are_deterministic_and_handle_empty_trajectories() {
    let model = sine_model();
    let traj = simulate_trajectory(&model, &[1.0], 4, RngStream::new(12, 0)).unwrap();
    assert_eq!(traj.truth.len(), 5);
    let init = gaussian_cloud(64, 1.0, 1.0, 13);
    let params = FilterParams::new(64, 20);
    for method in [Method::Ensbf, Method::Pf, Method::Enkf] {
        let a = run_filter(
            method,
            &model,
            &params,
            &init,
            &traj,
            RngStream::new(14, 0),
            true,
        )
        .unwrap();
        let b = run_filter(
            method,
            &model,
            &params,
            &init,
            &traj,
            RngStream::new(14, 0),
            true,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rmse.len(), 4);
        let empty = Trajectory {
            truth: vec![vec![1.0]],
            obs: vec![],
        };
        let t = run_filter(
            method,
            &model,
            &params,
            &init,
            &empty,
            RngStream::new(14, 0),
            false,
        )
        .unwrap();
        assert!(t.rmse.is_empty() && t.steps.is_empty());
    }
}

#[test]
fn bridge_output_stays_near_the_prior_hull() {
    let model = sine_model();
    let prior = gaussian_cloud(300, 0.0, 1.0, 15);
    let params = FilterParams::new(500, 50);
    let out = ensbf_analysis(&prior, &[0.4], &model, &params, RngStream::new(16, 0)).unwrap();
    let lo = prior.as_slice().iter().cloned().fold(f64::MAX, f64::min);
    let hi = prior.as_slice().iter().cloned().fold(f64::MIN, f64::max);
    let slack = 5.0 * (1.0f64 / 50.0).sqrt();
    assert!(out
        .as_slice()
        .iter()
        .all(|x| *x > lo - slack && *x < hi + slack));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prior_proposal_reproduces_the_plain_bridge_step(seed in any::<u64>(), y in -3.0f64..3.0) {
        let model = sine_model();
        let post = gaussian_cloud(40, 0.5, 1.0, seed);
        let mut params = FilterParams::new(30, 12);
        params.proposal = Some(Proposal::PriorTransition);
        let rng = RngStream::new(seed, 1);
        let a = ensbf_step(&post, &[y], &model, &params, rng).unwrap();
        let b = ensbf_is_analysis(&post, &[y], &model, &params, rng).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn likelihood_shift_leaves_the_analysis_unchanged(
        seed in any::<u64>(),
        raw in prop::collection::vec(-64i32..0, 25),
        shift in -40i32..40,
    ) {
        let prior = gaussian_cloud(25, 0.0, 1.0, seed);
        let params = FilterParams::new(20, 10);
        let base: Vec<f64> = raw.iter().map(|v| *v as f64 / 8.0).collect();
        let moved: Vec<f64> = base.iter().map(|v| v + shift as f64).collect();
        let rng = RngStream::new(seed, 2);
        let a = ensbf_analysis_weighted(&prior, LogWeights::new(base).unwrap(), &params, rng).unwrap();
        let b = ensbf_analysis_weighted(&prior, LogWeights::new(moved).unwrap(), &params, rng).unwrap();
        prop_assert_eq!(a, b);
    }
}
