//! Weight ensembles, the induced `Q̃` table and the greedy decision rule.

use crate::environment::{argmax_first, DecisionRule, LinearMdp};
use crate::numerics::{dot, CholeskyFactor};

use super::stats::StepStatistics;
use super::AgentError;

/// What a planner produced for one step.
#[derive(Debug, Clone)]
pub enum StepWeights {
    /// `Q̃(s, a) = max_m φ(s, a)ᵀ w_m`.
    Ensemble(Vec<Vec<f64>>),
    /// `Q(s, a) = φ(s, a)ᵀ w + β ‖φ(s, a)‖_{Ω⁻¹}`.
    Optimistic {
        weights: Vec<f64>,
        bonus: f64,
        factor: CholeskyFactor,
    },
}

impl StepWeights {
    pub fn q_value(&self, phi: &[f64]) -> Result<f64, AgentError> {
        match self {
            Self::Ensemble(members) => Ok(members
                .iter()
                .map(|w| dot(phi, w))
                .fold(f64::NEG_INFINITY, f64::max)),
            Self::Optimistic {
                weights,
                bonus,
                factor,
            } => {
                let width = factor.inverse_quadratic_form(phi)?.sqrt();
                Ok(dot(phi, weights) + bonus * width)
            }
        }
    }
}

/// A planned policy: per-step weights plus the materialized `Q̃` table.
#[derive(Debug, Clone)]
pub struct Policy {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    weights: Vec<StepWeights>,
    // [h][s][a], untruncated
    q: Vec<f64>,
    // [h][s]
    actions: Vec<usize>,
}

impl Policy {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn weights(&self, h: usize) -> &StepWeights {
        &self.weights[h]
    }

    /// Ensemble members at step `h` (empty for optimistic policies).
    pub fn ensemble(&self, h: usize) -> &[Vec<f64>] {
        match &self.weights[h] {
            StepWeights::Ensemble(members) => members,
            StepWeights::Optimistic { .. } => &[],
        }
    }

    /// Untruncated `Q̃_h(s, a)`.
    pub fn q_value(&self, h: usize, s: usize, a: usize) -> f64 {
        self.q[(h * self.num_states + s) * self.num_actions + a]
    }

    pub fn q_row(&self, h: usize, s: usize) -> &[f64] {
        let start = (h * self.num_states + s) * self.num_actions;
        &self.q[start..start + self.num_actions]
    }

    /// Truncation level `H − h` for 0-based `h`.
    pub fn truncation(&self, h: usize) -> f64 {
        (self.horizon - h) as f64
    }

    /// `Ṽ_h(s)`: truncated greedy value, floored at zero.
    pub fn value(&self, h: usize, s: usize) -> f64 {
        truncated_value(self.q_row(h, s), self.truncation(h))
    }

    /// `argmax_a min{Q̃_h(s, a), H − h}`, lowest index on ties.
    pub fn act(&self, h: usize, s: usize) -> Result<usize, AgentError> {
        if h >= self.horizon {
            return Err(AgentError::IndexOutOfRange {
                what: "step",
                index: h,
                bound: self.horizon,
            });
        }
        if s >= self.num_states {
            return Err(AgentError::IndexOutOfRange {
                what: "state",
                index: s,
                bound: self.num_states,
            });
        }
        Ok(self.actions[h * self.num_states + s])
    }
}

impl DecisionRule for Policy {
    fn action_probabilities(&self, step: usize, state: usize, probs: &mut [f64]) {
        probs.fill(0.0);
        probs[self.actions[step * self.num_states + state]] = 1.0;
    }
}

/// Greedy action on a `Q` row truncated at `cap`.
pub fn greedy_action(q_row: &[f64], cap: f64) -> usize {
    argmax_first(q_row.iter().map(|&q| q.min(cap)))
}

fn truncated_value(q_row: &[f64], cap: f64) -> f64 {
    q_row
        .iter()
        .map(|&q| q.min(cap))
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0)
}

/// Backward value iteration shared by every planner.
///
/// For `h = H−1, …, 0` the targets are assembled with `Ṽ_{h+1}` (zero past
/// the horizon) and handed to `step_weights`, which returns the weights for
/// step `h`.
pub fn plan_backward<F>(
    stats: &StepStatistics,
    mdp: &LinearMdp,
    mut step_weights: F,
) -> Result<Policy, AgentError>
where
    F: FnMut(usize, &[f64]) -> Result<StepWeights, AgentError>,
{
    if stats.horizon() != mdp.horizon() || stats.dim() != mdp.dim() {
        return Err(AgentError::Invalid("statistics do not match the MDP".into()));
    }
    let (horizon, ns, na) = (mdp.horizon(), mdp.num_states(), mdp.num_actions());
    let mut q = vec![0.0; horizon * ns * na];
    let mut actions = vec![0; horizon * ns];
    let mut weights = Vec::with_capacity(horizon);
    let mut v_next = vec![0.0; ns];
    for h in (0..horizon).rev() {
        let b = stats.assemble_targets(h, &v_next);
        let w = step_weights(h, &b)?;
        let cap = (horizon - h) as f64;
        for s in 0..ns {
            let row = &mut q[(h * ns + s) * na..(h * ns + s + 1) * na];
            for (a, slot) in row.iter_mut().enumerate() {
                *slot = w.q_value(mdp.features(s, a))?;
            }
            actions[h * ns + s] = greedy_action(row, cap);
            v_next[s] = truncated_value(row, cap);
        }
        weights.push(w);
    }
    weights.reverse();
    Ok(Policy {
        horizon,
        num_states: ns,
        num_actions: na,
        weights,
        q,
        actions,
    })
}
