//! Posterior-sampling value iteration with multi-round ensembling.

use rand::Rng;

use crate::environment::LinearMdp;
use crate::numerics::{cholesky_factor, sample_gaussian, solve_spd};

use super::policy::{plan_backward, Policy, StepWeights};
use super::stats::StepStatistics;
use super::AgentError;

/// Plan one episode: at each step draw `ensemble` weights from
/// `N(ŵ_h, ν² Ω_h⁻¹)` with `ŵ_h = Ω_h⁻¹ b_h`.
///
/// With no arrivals this samples from the prior `N(0, ν²/λ · I)`.
pub fn psvi_plan<R: Rng + ?Sized>(
    stats: &StepStatistics,
    mdp: &LinearMdp,
    nu: f64,
    ensemble: usize,
    rng: &mut R,
) -> Result<Policy, AgentError> {
    if !(nu >= 0.0) {
        return Err(AgentError::Invalid(format!("nu must be non-negative, got {nu}")));
    }
    if ensemble == 0 {
        return Err(AgentError::Invalid("ensemble size must be positive".into()));
    }
    plan_backward(stats, mdp, |h, b| {
        let factor = cholesky_factor(stats.gram(h))?;
        let mean = solve_spd(&factor, b)?;
        let members = (0..ensemble)
            .map(|_| sample_gaussian(&mean, &factor, nu, rng))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(StepWeights::Ensemble(members))
    })
}
