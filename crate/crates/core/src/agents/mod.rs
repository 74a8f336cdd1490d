//! The three delayed-feedback planners and the statistics they share.
//!
//! * [`psvi::psvi_plan`]: Gaussian posterior sampling with an ensemble max.
//! * [`lmc::lpsvi_plan`]: the same ensemble, sampled by Langevin dynamics.
//! * [`ucbvi::ucbvi_plan`]: ridge LSVI plus an elliptical bonus.
//!
//! [`Agent`] bundles a planner with the statistics it owns, which is what
//! the experiment loop drives.

pub mod lmc;
pub mod policy;
pub mod psvi;
pub mod stats;
pub mod ucbvi;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{LinearMdp, Trajectory};
use crate::numerics::NumericsError;

pub use lmc::{lmc, lmc_closed_form, lpsvi_plan, LmcLaw, LmcParams, StepSize, WarmStart};
pub use policy::{Policy, StepWeights};
pub use psvi::psvi_plan;
pub use stats::StepStatistics;
pub use ucbvi::ucbvi_plan;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("langevin iterate diverged at step {iteration} (norm {norm:e})")]
    Divergence { iteration: usize, norm: f64 },
    #[error("step size {eta} does not keep I - 2ηΩ positive definite")]
    StepTooLarge { eta: f64 },
    #[error("{what} index {index} out of range (< {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },
    #[error("{0}")]
    Invalid(String),
}

/// How the UCB bonus coefficient is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum BonusRule {
    /// `β = (c_β/2) · dH · √ln(dH)` at every step and episode.
    DimensionHorizon { c_beta: f64 },
    /// `β_h^k = (c_β/2) · d · √k · (H − h)` with 1-based `h`.
    GrowingEpisode { c_beta: f64 },
    Constant { beta: f64 },
}

impl BonusRule {
    /// Coefficients for every 0-based step when planning episode `k`.
    pub fn coefficients(&self, dim: usize, horizon: usize, k: usize) -> Vec<f64> {
        let (d, big_h) = (dim as f64, horizon as f64);
        match *self {
            Self::DimensionHorizon { c_beta } => {
                let dh = d * big_h;
                vec![c_beta / 2.0 * dh * dh.ln().sqrt(); horizon]
            }
            Self::GrowingEpisode { c_beta } => (0..horizon)
                .map(|h| c_beta / 2.0 * d * (k as f64).sqrt() * (horizon - (h + 1)) as f64)
                .collect(),
            Self::Constant { beta } => vec![beta; horizon],
        }
    }
}

/// Resolved planner hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum PlannerKind {
    Psvi { nu: f64, ensemble: usize },
    Lpsvi(LmcParams),
    Ucbvi(BonusRule),
}

/// A planner plus the statistics it owns exclusively.
#[derive(Debug, Clone)]
pub struct Agent {
    kind: PlannerKind,
    stats: StepStatistics,
    warm: Option<WarmStart>,
}

impl Agent {
    /// `sigma` only scales the PSVI statistics; the other planners use 1.
    pub fn new(
        kind: PlannerKind,
        mdp: &LinearMdp,
        lambda: f64,
        sigma: f64,
    ) -> Result<Self, AgentError> {
        let sigma = match kind {
            PlannerKind::Psvi { .. } => sigma,
            _ => 1.0,
        };
        Ok(Self {
            kind,
            stats: StepStatistics::new(mdp, lambda, sigma)?,
            warm: None,
        })
    }

    pub fn kind(&self) -> &PlannerKind {
        &self.kind
    }

    pub fn stats(&self) -> &StepStatistics {
        &self.stats
    }

    pub fn ingest_arrivals(
        &mut self,
        mdp: &LinearMdp,
        trajectories: &[Trajectory],
    ) -> Result<(), AgentError> {
        self.stats.ingest_arrivals(mdp, trajectories)
    }

    pub fn ingest_shadow(
        &mut self,
        mdp: &LinearMdp,
        trajectories: &[Trajectory],
    ) -> Result<(), AgentError> {
        self.stats.ingest_shadow(mdp, trajectories)
    }

    /// Plan episode `k` (1-based).
    pub fn plan<R: Rng + ?Sized>(
        &mut self,
        mdp: &LinearMdp,
        k: usize,
        rng: &mut R,
    ) -> Result<Policy, AgentError> {
        match &self.kind {
            PlannerKind::Psvi { nu, ensemble } => psvi_plan(&self.stats, mdp, *nu, *ensemble, rng),
            PlannerKind::Lpsvi(params) => {
                let (policy, warm) = lpsvi_plan(&self.stats, mdp, params, rng, self.warm.as_ref())?;
                if params.warm_start {
                    self.warm = Some(warm);
                }
                Ok(policy)
            }
            PlannerKind::Ucbvi(rule) => {
                let betas = rule.coefficients(mdp.dim(), mdp.horizon(), k);
                ucbvi_plan(&self.stats, mdp, &betas)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_horizon_bonus() {
        let betas = BonusRule::DimensionHorizon { c_beta: 0.1 }.coefficients(10, 20, 7);
        let expected = 0.05 * 200.0 * 200f64.ln().sqrt();
        assert_eq!(betas.len(), 20);
        assert!(betas.iter().all(|b| (b - expected).abs() < 1e-12));
    }

    #[test]
    fn growing_bonus_vanishes_at_last_step() {
        let betas = BonusRule::GrowingEpisode { c_beta: 0.04 }.coefficients(10, 20, 4);
        assert!((betas[0] - 0.02 * 10.0 * 2.0 * 19.0).abs() < 1e-12);
        assert_eq!(betas[19], 0.0);
    }
}
