//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here goes through the crate's own linear algebra: least squares
//! problems are materialized and solved with nalgebra's LU decomposition.

#![allow(dead_code)]

use delayed_psvi::agents::StepStatistics;
use delayed_psvi::environment::LinearMdp;
use nalgebra::{DMatrix, DVector};

/// Ridge least-squares value iteration on the raw arrived transitions.
///
/// Returns untruncated `Q[h][s][a]`; values are truncated at `H − h` and
/// floored at zero when propagated backwards.
pub fn ridge_lsvi_q(stats: &StepStatistics, mdp: &LinearMdp) -> Vec<Vec<Vec<f64>>> {
    let (horizon, ns, na, d) = (mdp.horizon(), mdp.num_states(), mdp.num_actions(), mdp.dim());
    let inv_var = stats.sigma().powi(-2);
    let mut q = vec![vec![vec![0.0; na]; ns]; horizon];
    let mut v_next = vec![0.0; ns];
    for h in (0..horizon).rev() {
        let transitions = &stats.step(h).transitions;
        let n = transitions.len();
        let mut phi = DMatrix::<f64>::zeros(n, d);
        let mut y = DVector::<f64>::zeros(n);
        for (i, t) in transitions.iter().enumerate() {
            for (j, &x) in mdp.features(t.state, t.action).iter().enumerate() {
                phi[(i, j)] = x;
            }
            y[i] = t.reward + v_next[t.next_state];
        }
        let omega = phi.transpose() * &phi * inv_var
            + DMatrix::<f64>::identity(d, d) * stats.lambda();
        let rhs = phi.transpose() * y * inv_var;
        let w = omega.lu().solve(&rhs).expect("ridge system is nonsingular");
        let cap = (horizon - h) as f64;
        for s in 0..ns {
            for a in 0..na {
                let f = DVector::from_column_slice(mdp.features(s, a));
                q[h][s][a] = f.dot(&w);
            }
            v_next[s] = q[h][s]
                .iter()
                .map(|&x| x.min(cap))
                .fold(f64::NEG_INFINITY, f64::max)
                .max(0.0);
        }
    }
    q
}

/// Sample mean and (unbiased) covariance of row vectors.
pub fn sample_moments(samples: &[Vec<f64>]) -> (DVector<f64>, DMatrix<f64>) {
    let n = samples.len() as f64;
    let d = samples[0].len();
    let mut mean = DVector::<f64>::zeros(d);
    for s in samples {
        mean += DVector::from_column_slice(s);
    }
    mean /= n;
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for s in samples {
        let c = DVector::from_column_slice(s) - &mean;
        cov += &c * c.transpose();
    }
    cov /= n - 1.0;
    (mean, cov)
}

/// Symmetric positive definite `XᵀX + I` from a random `rows × d` design.
pub fn random_spd<R: rand::Rng>(d: usize, rows: usize, rng: &mut R) -> DMatrix<f64> {
    let x = DMatrix::<f64>::from_fn(rows, d, |_, _| rng.random_range(-1.0..1.0));
    x.transpose() * &x + DMatrix::<f64>::identity(d, d)
}
