mod common;

use common::ridge_lsvi_q;
use delayed_psvi::agents::lmc::{lmc_with_step, loss_gradient};
use delayed_psvi::agents::{
    lpsvi_plan, psvi_plan, ucbvi_plan, LmcParams, StepSize, StepStatistics,
};
use delayed_psvi::environment::{
    build_riverswim_mdp, build_synthetic_mdp, rollout, LinearMdp, RewardMode, UniformPolicy,
};
use delayed_psvi::numerics::{max_eigenvalue, SpdMatrix};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn synthetic() -> LinearMdp {
    let alpha: Vec<bool> = (0..6).map(|h| h % 2 == 1).collect();
    build_synthetic_mdp(20, 6, 0.99, &alpha, RewardMode::Feature).unwrap()
}

/// Statistics from `episodes` uniformly random rollouts.
fn random_stats(mdp: &LinearMdp, episodes: usize, sigma: f64, seed: u64) -> StepStatistics {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trajs: Vec<_> = (1..=episodes)
        .map(|k| rollout(mdp, &UniformPolicy, k, &mut rng))
        .collect();
    let mut stats = StepStatistics::new(mdp, 1.0, sigma).unwrap();
    stats.ingest_arrivals(mdp, &trajs).unwrap();
    stats
}

fn max_q_gap(mdp: &LinearMdp, q: &[Vec<Vec<f64>>], policy: &delayed_psvi::agents::Policy) -> f64 {
    let mut gap: f64 = 0.0;
    for h in 0..mdp.horizon() {
        for s in 0..mdp.num_states() {
            for a in 0..mdp.num_actions() {
                gap = gap.max((q[h][s][a] - policy.q_value(h, s, a)).abs());
            }
        }
    }
    gap
}

#[test]
fn psvi_without_noise_is_ridge_lsvi() {
    for (mdp, sigma) in [(synthetic(), 0.1), (synthetic(), 1.0), (build_riverswim_mdp(8).unwrap(), 1.13)] {
        let stats = random_stats(&mdp, 40, sigma, 3);
        let oracle = ridge_lsvi_q(&stats, &mdp);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let policy = psvi_plan(&stats, &mdp, 0.0, 1, &mut rng).unwrap();
        assert!(max_q_gap(&mdp, &oracle, &policy) < 1e-10);
    }
}

#[test]
fn ucbvi_without_bonus_is_ridge_lsvi() {
    let mdp = build_riverswim_mdp(10).unwrap();
    let stats = random_stats(&mdp, 30, 1.0, 4);
    let oracle = ridge_lsvi_q(&stats, &mdp);
    let policy = ucbvi_plan(&stats, &mdp, &[0.0; 10]).unwrap();
    assert!(max_q_gap(&mdp, &oracle, &policy) < 1e-10);
}

#[test]
fn ucbvi_bonus_at_last_step() {
    let mdp = synthetic();
    let stats = random_stats(&mdp, 25, 1.0, 5);
    let oracle = ridge_lsvi_q(&stats, &mdp);
    let beta = 0.7;
    let policy = ucbvi_plan(&stats, &mdp, &[beta; 6]).unwrap();
    let h = 5;
    let omega_inv = stats.gram(h).as_matrix().clone().try_inverse().unwrap();
    for s in 0..2 {
        for a in 0..20 {
            let phi = DVector::from_column_slice(mdp.features(s, a));
            let width = (phi.transpose() * &omega_inv * &phi)[(0, 0)].sqrt();
            let expected = oracle[h][s][a] + beta * width;
            assert!((policy.q_value(h, s, a) - expected).abs() < 1e-10);
        }
    }
}

#[test]
fn lpsvi_without_temperature_converges_to_ridge() {
    let mdp = build_riverswim_mdp(8).unwrap();
    let stats = random_stats(&mdp, 10, 1.0, 6);
    // Contraction factor 1 − 2ηλ_min = 1 − λ_min/λ_max at c_η = 1/2.
    let kappa = (0..8)
        .map(|h| {
            let m = stats.gram(h).as_matrix();
            let eig = m.clone().symmetric_eigen().eigenvalues;
            eig.max() / eig.min()
        })
        .fold(1.0, f64::max);
    let iterations = ((1e-12f64).ln() / (1.0 - 1.0 / kappa).ln()).ceil() as usize;
    let params = LmcParams {
        step_size: StepSize::Scaled { c_eta: 0.5 },
        iterations,
        temperature: 0.0,
        chains: 1,
        warm_start: false,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (policy, _) = lpsvi_plan(&stats, &mdp, &params, &mut rng, None).unwrap();
    let oracle = ridge_lsvi_q(&stats, &mdp);
    assert!(max_q_gap(&mdp, &oracle, &policy) < 1e-6);
}

#[test]
fn psvi_prior_ensemble_max_matches_order_statistic() {
    // No data and V_H ≡ 0: at the last step each member gives
    // φᵀw ~ N(0, ν²‖φ‖²/λ), so Q̃ is the max of two such draws with mean
    // ν‖φ‖/√(λπ) and second moment ν²‖φ‖²/λ.
    let mdp = build_riverswim_mdp(3).unwrap();
    let (nu, lambda) = (2.5, 4.0);
    let stats = StepStatistics::new(&mdp, lambda, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 20_000;
    let draws: Vec<f64> = (0..n)
        .map(|_| psvi_plan(&stats, &mdp, nu, 2, &mut rng).unwrap().q_value(2, 1, 0))
        .collect();
    let scale = nu / lambda.sqrt();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let second = draws.iter().map(|x| x * x).sum::<f64>() / n as f64;
    let expected_mean = scale / std::f64::consts::PI.sqrt();
    let sd = (scale * scale - expected_mean * expected_mean).sqrt();
    assert!((mean - expected_mean).abs() < 4.0 * sd / (n as f64).sqrt());
    assert!((second / (scale * scale) - 1.0).abs() < 0.05);
}

#[test]
fn lpsvi_prior_step_variance() {
    // Fresh statistics: Ω = λI so c_η = 1/2 makes A = 0 and a single
    // step already draws w ~ N(0, γ/λ · I).
    let mdp = build_riverswim_mdp(2).unwrap();
    let (lambda, gamma) = (2.0, 0.3);
    let stats = StepStatistics::new(&mdp, lambda, 1.0).unwrap();
    let params = LmcParams {
        step_size: StepSize::Scaled { c_eta: 0.5 },
        iterations: 5,
        temperature: gamma,
        chains: 1,
        warm_start: false,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 20_000;
    let draws: Vec<f64> = (0..n)
        .map(|_| {
            let (p, _) = lpsvi_plan(&stats, &mdp, &params, &mut rng, None).unwrap();
            p.q_value(1, 3, 1)
        })
        .collect();
    let var = draws.iter().map(|x| x * x).sum::<f64>() / n as f64;
    let expected = gamma / lambda;
    assert!((var - expected).abs() < 5.0 * expected * (2.0 / n as f64).sqrt());
}

#[test]
fn warm_start_is_carried_per_step_and_chain() {
    let mdp = synthetic();
    let stats = random_stats(&mdp, 5, 1.0, 2);
    let params = LmcParams {
        step_size: StepSize::Scaled { c_eta: 0.5 },
        iterations: 0,
        temperature: 0.02,
        chains: 3,
        warm_start: true,
    };
    let warm: Vec<Vec<Vec<f64>>> = (0..6)
        .map(|h| (0..3).map(|m| vec![(h * 3 + m) as f64 * 0.01; 10]).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (policy, next) = lpsvi_plan(&stats, &mdp, &params, &mut rng, Some(&warm)).unwrap();
    // Zero iterations return the starting points unchanged.
    assert_eq!(next, warm);
    for h in 0..6 {
        assert_eq!(policy.ensemble(h), warm[h].as_slice());
    }
}

fn random_spd(d: usize, seed: u64) -> (SpdMatrix, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = common::random_spd(d, 2 * d, &mut rng);
    (SpdMatrix::from_matrix(m.clone()).unwrap(), m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deterministic_lmc_contracts(
        seed in any::<u64>(),
        n in 0usize..200,
        w0 in prop::collection::vec(-5.0f64..5.0, 6),
        b in prop::collection::vec(-5.0f64..5.0, 6),
    ) {
        let (gram, m) = random_spd(6, seed);
        let eta = 0.5 / max_eigenvalue(&gram, 1e-10).unwrap();
        let lambda_min = m.clone().symmetric_eigen().eigenvalues.min();
        let w_hat = m.lu().solve(&DVector::from_column_slice(&b)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w = lmc_with_step(&gram, &b, &w0, eta, n, 0.0, &mut rng).unwrap();
        let err = (DVector::from_column_slice(&w) - &w_hat).norm();
        let start = (DVector::from_column_slice(&w0) - &w_hat).norm();
        let bound = (1.0 - 2.0 * eta * lambda_min).powi(n as i32) * start + 1e-10;
        prop_assert!(err <= bound * (1.0 + 1e-6), "err {err} bound {bound}");
    }

    #[test]
    fn gradient_is_twice_residual(
        seed in any::<u64>(),
        w in prop::collection::vec(-3.0f64..3.0, 5),
        b in prop::collection::vec(-3.0f64..3.0, 5),
    ) {
        let (gram, m) = random_spd(5, seed);
        let g = loss_gradient(&gram, &b, &w).unwrap();
        let expected = (m * DVector::from_column_slice(&w) - DVector::from_column_slice(&b)) * 2.0;
        for (x, y) in g.iter().zip(expected.iter()) {
            prop_assert!((x - y).abs() < 1e-10 * (1.0 + y.abs()));
        }
    }
}
