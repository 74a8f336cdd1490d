//! Per-step sufficient statistics built from arrived feedback.
//!
//! Targets `r + Ṽ_{h+1}(s')` change every episode, but the features do not,
//! so the right-hand side is reassembled from per-next-state feature sums:
//! `Σ φ (r + V(s')) = Σ φ r + Σ_{s'} V(s') Σ_{τ: s'_τ = s'} φ_τ`.

use crate::environment::{LinearMdp, Trajectory, Transition};
use crate::numerics::SpdMatrix;

use super::AgentError;

#[derive(Debug, Clone)]
pub struct StepData {
    /// `σ⁻² Σ 𝟙 φφᵀ + λI` over arrived transitions.
    pub gram: SpdMatrix,
    /// `Σ 𝟙 φ r`.
    pub reward_vec: Vec<f64>,
    /// `Σ 𝟙 φ` grouped by next state.
    pub next_state_agg: Vec<Vec<f64>>,
    pub count: usize,
    /// Raw arrived transitions, kept for brute-force reconstruction.
    pub transitions: Vec<Transition>,
    /// Same construction as `gram` but over every generated transition,
    /// regardless of delay.
    pub shadow: SpdMatrix,
    pub shadow_count: usize,
}

#[derive(Debug, Clone)]
pub struct StepStatistics {
    dim: usize,
    num_states: usize,
    lambda: f64,
    sigma: f64,
    steps: Vec<StepData>,
}

impl StepStatistics {
    /// Empty statistics: `Ω_h = λI`, zero aggregates.
    pub fn new(mdp: &LinearMdp, lambda: f64, sigma: f64) -> Result<Self, AgentError> {
        if !(lambda > 0.0) {
            return Err(AgentError::Invalid(format!("lambda must be positive, got {lambda}")));
        }
        if !(sigma > 0.0) {
            return Err(AgentError::Invalid(format!("sigma must be positive, got {sigma}")));
        }
        let (dim, num_states) = (mdp.dim(), mdp.num_states());
        let step = StepData {
            gram: SpdMatrix::scaled_identity(dim, lambda),
            reward_vec: vec![0.0; dim],
            next_state_agg: vec![vec![0.0; dim]; num_states],
            count: 0,
            transitions: Vec::new(),
            shadow: SpdMatrix::scaled_identity(dim, lambda),
            shadow_count: 0,
        };
        Ok(Self {
            dim,
            num_states,
            lambda,
            sigma,
            steps: vec![step; mdp.horizon()],
        })
    }

    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn step(&self, h: usize) -> &StepData {
        &self.steps[h]
    }

    pub fn gram(&self, h: usize) -> &SpdMatrix {
        &self.steps[h].gram
    }

    pub fn shadow(&self, h: usize) -> &SpdMatrix {
        &self.steps[h].shadow
    }

    fn check(&self, mdp: &LinearMdp, trajectories: &[Trajectory]) -> Result<(), AgentError> {
        if mdp.dim() != self.dim || mdp.horizon() != self.horizon() {
            return Err(AgentError::Invalid("statistics do not match the MDP".into()));
        }
        if let Some(t) = trajectories.iter().find(|t| t.steps.len() != self.horizon()) {
            return Err(AgentError::Invalid(format!(
                "trajectory of episode {} has {} steps, horizon is {}",
                t.origin_episode,
                t.steps.len(),
                self.horizon()
            )));
        }
        Ok(())
    }

    /// Fold newly arrived trajectories into the delayed statistics.
    pub fn ingest_arrivals(
        &mut self,
        mdp: &LinearMdp,
        trajectories: &[Trajectory],
    ) -> Result<(), AgentError> {
        self.check(mdp, trajectories)?;
        let weight = self.sigma.powi(-2);
        for traj in trajectories {
            for (step, t) in self.steps.iter_mut().zip(&traj.steps) {
                let phi = mdp.features(t.state, t.action);
                step.gram.add_outer(phi, weight)?;
                for (i, &x) in phi.iter().enumerate() {
                    step.reward_vec[i] += x * t.reward;
                    step.next_state_agg[t.next_state][i] += x;
                }
                step.count += 1;
                step.transitions.push(*t);
            }
        }
        Ok(())
    }

    /// Fold trajectories into the full-information shadow only.
    pub fn ingest_shadow(
        &mut self,
        mdp: &LinearMdp,
        trajectories: &[Trajectory],
    ) -> Result<(), AgentError> {
        self.check(mdp, trajectories)?;
        let weight = self.sigma.powi(-2);
        for traj in trajectories {
            for (step, t) in self.steps.iter_mut().zip(&traj.steps) {
                step.shadow.add_outer(mdp.features(t.state, t.action), weight)?;
                step.shadow_count += 1;
            }
        }
        Ok(())
    }

    /// `σ⁻² (Σ φ r + Σ_{s'} agg[s'] · v_next[s'])`, the right-hand side of
    /// `ŵ = Ω⁻¹ b`.
    pub fn assemble_targets(&self, h: usize, v_next: &[f64]) -> Vec<f64> {
        assert_eq!(v_next.len(), self.num_states, "one value per state");
        let step = &self.steps[h];
        let weight = self.sigma.powi(-2);
        let mut b = step.reward_vec.clone();
        for (agg, &v) in step.next_state_agg.iter().zip(v_next) {
            if v == 0.0 {
                continue;
            }
            for (bi, ai) in b.iter_mut().zip(agg) {
                *bi += ai * v;
            }
        }
        b.iter_mut().for_each(|x| *x *= weight);
        b
    }
}
