//! Least-squares value iteration with an elliptical UCB bonus on delayed data.

use crate::environment::LinearMdp;
use crate::numerics::{cholesky_factor, solve_spd};

use super::policy::{plan_backward, Policy, StepWeights};
use super::stats::StepStatistics;
use super::AgentError;

/// Deterministic optimistic plan with `Q_h = φᵀ w_h + β_h ‖φ‖_{Ω_h⁻¹}`.
///
/// `betas[h]` is the bonus coefficient at 0-based step `h`.
pub fn ucbvi_plan(
    stats: &StepStatistics,
    mdp: &LinearMdp,
    betas: &[f64],
) -> Result<Policy, AgentError> {
    if betas.len() != mdp.horizon() {
        return Err(AgentError::Invalid(format!(
            "expected {} bonus coefficients, got {}",
            mdp.horizon(),
            betas.len()
        )));
    }
    if let Some(b) = betas.iter().find(|b| !(**b >= 0.0)) {
        return Err(AgentError::Invalid(format!("bonus must be non-negative, got {b}")));
    }
    plan_backward(stats, mdp, |h, b| {
        let factor = cholesky_factor(stats.gram(h))?;
        let weights = solve_spd(&factor, b)?;
        Ok(StepWeights::Optimistic {
            weights,
            bonus: betas[h],
            factor,
        })
    })
}
