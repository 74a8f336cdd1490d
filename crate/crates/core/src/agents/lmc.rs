//! Langevin Monte Carlo on the quadratic delayed loss, the planner built on
//! it, and the exact Gaussian law of its output.
//!
//! The loss is `L(w) = Σ 𝟙 (φᵀw − ȳ)² + λ‖w‖²`, whose gradient is
//! `2(Ωw − b)` with `Ω = Σ 𝟙 φφᵀ + λI` and `b = Σ 𝟙 φ ȳ`. Each step is
//! `w ← w − η ∇L(w) + √(2ηγ) ε`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::environment::LinearMdp;
use crate::numerics::{cholesky_factor, max_eigenvalue, norm, solve_spd, SpdMatrix};

use super::policy::{plan_backward, Policy, StepWeights};
use super::stats::StepStatistics;
use super::AgentError;

/// Iterates whose norm exceeds this are reported as divergence.
pub const DIVERGENCE_NORM: f64 = 1e6;

/// Tolerance of the power iteration behind [`StepSize::Scaled`].
pub const EIGEN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StepSize {
    Fixed { eta: f64 },
    /// `η = c_η / λ_max(Ω_h)`, recomputed per step and episode.
    Scaled { c_eta: f64 },
}

impl StepSize {
    pub fn resolve(&self, gram: &SpdMatrix) -> Result<f64, AgentError> {
        let eta = match *self {
            Self::Fixed { eta } => eta,
            Self::Scaled { c_eta } => c_eta / max_eigenvalue(gram, EIGEN_TOL)?,
        };
        if eta > 0.0 && eta.is_finite() {
            Ok(eta)
        } else {
            Err(AgentError::Invalid(format!("step size must be positive, got {eta}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmcParams {
    pub step_size: StepSize,
    pub iterations: usize,
    pub temperature: f64,
    pub chains: usize,
    pub warm_start: bool,
}

/// `∇L(w) = 2(Ωw − b)`.
pub fn loss_gradient(gram: &SpdMatrix, b: &[f64], w: &[f64]) -> Result<Vec<f64>, AgentError> {
    let omega_w = gram.mul_vec(w)?;
    Ok(omega_w.iter().zip(b).map(|(x, y)| 2.0 * (x - y)).collect())
}

/// Run `params.iterations` Langevin steps from `w0`.
pub fn lmc<R: Rng + ?Sized>(
    gram: &SpdMatrix,
    b: &[f64],
    w0: &[f64],
    params: &LmcParams,
    rng: &mut R,
) -> Result<Vec<f64>, AgentError> {
    let eta = params.step_size.resolve(gram)?;
    lmc_with_step(gram, b, w0, eta, params.iterations, params.temperature, rng)
}

/// [`lmc`] with an explicit step size.
pub fn lmc_with_step<R: Rng + ?Sized>(
    gram: &SpdMatrix,
    b: &[f64],
    w0: &[f64],
    eta: f64,
    iterations: usize,
    temperature: f64,
    rng: &mut R,
) -> Result<Vec<f64>, AgentError> {
    let d = gram.dim();
    if b.len() != d || w0.len() != d {
        return Err(AgentError::Invalid(format!(
            "lmc expects vectors of length {d}, got b={} w0={}",
            b.len(),
            w0.len()
        )));
    }
    if !(temperature >= 0.0) {
        return Err(AgentError::Invalid(format!(
            "temperature must be non-negative, got {temperature}"
        )));
    }
    let noise = (2.0 * eta * temperature).sqrt();
    let mut w = w0.to_vec();
    for t in 1..=iterations {
        let grad = loss_gradient(gram, b, &w)?;
        for (wi, gi) in w.iter_mut().zip(&grad) {
            let eps: f64 = rng.sample(StandardNormal);
            *wi += -eta * gi + noise * eps;
        }
        let size = norm(&w);
        if !(size <= DIVERGENCE_NORM) {
            return Err(AgentError::Divergence {
                iteration: t,
                norm: size,
            });
        }
    }
    Ok(w)
}

/// Exact law of the output of [`lmc_with_step`].
#[derive(Debug, Clone)]
pub struct LmcLaw {
    pub mean: Vec<f64>,
    pub covariance: DMatrix<f64>,
}

/// With `A = I − 2ηΩ` and `ŵ = Ω⁻¹b`, the output after `n` steps is
/// Gaussian with mean `Aⁿ w0 + (I − Aⁿ) ŵ` and covariance
/// `γ (I − A²ⁿ) Ω⁻¹ (I + A)⁻¹`.
///
/// Requires `0 ≺ A`, i.e. `η < 1/(2 λ_max(Ω))`. Test oracle; the planners
/// never call it.
pub fn lmc_closed_form(
    gram: &SpdMatrix,
    b: &[f64],
    w0: &[f64],
    eta: f64,
    iterations: usize,
    temperature: f64,
) -> Result<LmcLaw, AgentError> {
    let d = gram.dim();
    if b.len() != d || w0.len() != d {
        return Err(AgentError::Invalid("dimension mismatch".into()));
    }
    let identity = DMatrix::<f64>::identity(d, d);
    let a = &identity - gram.as_matrix() * (2.0 * eta);
    let a_spd = SpdMatrix::from_matrix(a.clone())?;
    if !(eta > 0.0) || cholesky_factor(&a_spd).is_err() {
        return Err(AgentError::StepTooLarge { eta });
    }

    let mut a_pow = identity.clone();
    for _ in 0..iterations {
        a_pow = &a_pow * &a;
    }
    let omega = cholesky_factor(gram)?;
    let w_hat = DVector::from_vec(solve_spd(&omega, b)?);
    let w0 = DVector::from_column_slice(w0);
    let mean = &a_pow * w0 + (&identity - &a_pow) * w_hat;

    let a_pow2 = &a_pow * &a_pow;
    let i_plus_a = SpdMatrix::from_matrix(&identity + &a)?;
    let i_plus_a_inv = cholesky_factor(&i_plus_a)?.inverse();
    let mut cov = (&identity - a_pow2) * omega.inverse() * i_plus_a_inv * temperature;
    cov = (&cov + cov.transpose()) * 0.5;
    Ok(LmcLaw {
        mean: mean.iter().copied().collect(),
        covariance: cov,
    })
}

/// Previous-episode chain outputs, indexed `[h][m]`.
pub type WarmStart = Vec<Vec<Vec<f64>>>;

/// Plan one episode with `params.chains` Langevin chains per step.
///
/// Chains start from the matching entry of `warm` when warm starting is on
/// and one is given, else from zero. Returns the policy together with the
/// chain outputs for the next episode's warm start.
pub fn lpsvi_plan<R: Rng + ?Sized>(
    stats: &StepStatistics,
    mdp: &LinearMdp,
    params: &LmcParams,
    rng: &mut R,
    warm: Option<&WarmStart>,
) -> Result<(Policy, WarmStart), AgentError> {
    if params.chains == 0 {
        return Err(AgentError::Invalid("chain count must be positive".into()));
    }
    let d = mdp.dim();
    let zero = vec![0.0; d];
    let policy = plan_backward(stats, mdp, |h, b| {
        let gram = stats.gram(h);
        let eta = params.step_size.resolve(gram)?;
        let members = (0..params.chains)
            .map(|m| {
                let w0 = match warm {
                    Some(prev) if params.warm_start => prev
                        .get(h)
                        .and_then(|chains| chains.get(m))
                        .map(Vec::as_slice)
                        .unwrap_or(&zero),
                    _ => &zero,
                };
                lmc_with_step(gram, b, w0, eta, params.iterations, params.temperature, rng)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(StepWeights::Ensemble(members))
    })?;
    let next_warm = (0..mdp.horizon())
        .map(|h| policy.ensemble(h).to_vec())
        .collect();
    Ok((policy, next_warm))
}
