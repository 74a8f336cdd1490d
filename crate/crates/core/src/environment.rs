//! Finite linear MDPs, the two benchmark environments, episode rollout and
//! exact dynamic-programming oracles.
//!
//! Steps are 0-based throughout the crate: step `h` runs over `0..horizon`,
//! and the value at step `h` is bounded by `horizon - h` (the truncation
//! level).

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::dot;

/// Slack on individual transition probabilities before clamping.
pub const PROB_ENTRY_TOL: f64 = 1e-12;
/// Slack on the sum of a transition row.
pub const PROB_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("synthetic environment supports at most 256 actions, got {0}")]
    TooManyActions(usize),
    #[error("{what} index {index} out of range (< {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },
    #[error("transition row (h={step}, s={state}, a={action}) is not a distribution: {detail}")]
    InvalidTransition {
        step: usize,
        state: usize,
        action: usize,
        detail: String,
    },
    #[error("reward r_{step}({state}, {action}) = {value} outside [0, 1]")]
    RewardOutOfRange {
        step: usize,
        state: usize,
        action: usize,
        value: f64,
    },
    #[error("invalid environment: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// `r_h(s, a) = φ(s, a)ᵀ θ_h`.
    #[default]
    Feature,
    /// Tabular rewards that replace the linear ones (see
    /// [`build_synthetic_mdp`]).
    TabularOverride,
}

/// A finite-horizon linear MDP with `P_h(s'|s,a) = φ(s,a)ᵀ μ_h(s')`.
///
/// The transition and reward tables are materialized and validated on
/// construction; the linear parameters are kept alongside them.
#[derive(Debug, Clone)]
pub struct LinearMdp {
    num_states: usize,
    num_actions: usize,
    dim: usize,
    horizon: usize,
    initial_state: usize,
    features: Vec<Vec<f64>>,
    reward_weights: Vec<Vec<f64>>,
    transition_measures: Vec<Vec<Vec<f64>>>,
    reward_override: Option<Vec<f64>>,
    // [h][s][a][s']
    transitions: Vec<f64>,
    // [h][s][a]
    rewards: Vec<f64>,
}

/// Raw parameters for [`LinearMdp::new`].
#[derive(Debug, Clone)]
pub struct LinearMdpParts {
    pub num_states: usize,
    pub num_actions: usize,
    pub dim: usize,
    pub horizon: usize,
    pub initial_state: usize,
    /// Indexed by `s * num_actions + a`.
    pub features: Vec<Vec<f64>>,
    /// One `θ_h` per step.
    pub reward_weights: Vec<Vec<f64>>,
    /// `μ_h(s')` indexed `[h][s']`.
    pub transition_measures: Vec<Vec<Vec<f64>>>,
    /// Optional tabular rewards indexed by `s * num_actions + a`.
    pub reward_override: Option<Vec<f64>>,
}

impl LinearMdp {
    pub fn new(parts: LinearMdpParts) -> Result<Self, EnvError> {
        let LinearMdpParts {
            num_states,
            num_actions,
            dim,
            horizon,
            initial_state,
            features,
            reward_weights,
            transition_measures,
            reward_override,
        } = parts;
        if num_states == 0 || num_actions == 0 || dim == 0 || horizon == 0 {
            return Err(EnvError::Invalid(
                "states, actions, dim and horizon must be positive".into(),
            ));
        }
        if initial_state >= num_states {
            return Err(EnvError::IndexOutOfRange {
                what: "initial state",
                index: initial_state,
                bound: num_states,
            });
        }
        let pairs = num_states * num_actions;
        if features.len() != pairs || features.iter().any(|f| f.len() != dim) {
            return Err(EnvError::Invalid(format!(
                "expected {pairs} feature vectors of length {dim}"
            )));
        }
        if reward_weights.len() != horizon || reward_weights.iter().any(|t| t.len() != dim) {
            return Err(EnvError::Invalid(format!(
                "expected {horizon} reward vectors of length {dim}"
            )));
        }
        if transition_measures.len() != horizon
            || transition_measures
                .iter()
                .any(|mu| mu.len() != num_states || mu.iter().any(|m| m.len() != dim))
        {
            return Err(EnvError::Invalid(format!(
                "expected {horizon} x {num_states} transition measures of length {dim}"
            )));
        }
        if let Some(table) = &reward_override {
            if table.len() != pairs {
                return Err(EnvError::Invalid(format!(
                    "reward override must have {pairs} entries"
                )));
            }
        }

        let mut transitions = Vec::with_capacity(horizon * pairs * num_states);
        let mut rewards = Vec::with_capacity(horizon * pairs);
        for h in 0..horizon {
            for s in 0..num_states {
                for a in 0..num_actions {
                    let phi = &features[s * num_actions + a];
                    let mut row: Vec<f64> = transition_measures[h]
                        .iter()
                        .map(|mu| dot(phi, mu))
                        .collect();
                    let invalid = |detail: String| EnvError::InvalidTransition {
                        step: h,
                        state: s,
                        action: a,
                        detail,
                    };
                    if let Some(p) = row
                        .iter()
                        .find(|p| !(-PROB_ENTRY_TOL..=1.0 + PROB_ENTRY_TOL).contains(*p))
                    {
                        return Err(invalid(format!("entry {p}")));
                    }
                    let total: f64 = row.iter().sum();
                    if (total - 1.0).abs() > PROB_SUM_TOL {
                        return Err(invalid(format!("sum {total}")));
                    }
                    for p in &mut row {
                        *p = p.clamp(0.0, 1.0);
                    }
                    transitions.extend_from_slice(&row);

                    let r = match &reward_override {
                        Some(table) => table[s * num_actions + a],
                        None => dot(phi, &reward_weights[h]),
                    };
                    if !(-PROB_ENTRY_TOL..=1.0 + PROB_ENTRY_TOL).contains(&r) {
                        return Err(EnvError::RewardOutOfRange {
                            step: h,
                            state: s,
                            action: a,
                            value: r,
                        });
                    }
                    rewards.push(r);
                }
            }
        }

        Ok(Self {
            num_states,
            num_actions,
            dim,
            horizon,
            initial_state,
            features,
            reward_weights,
            transition_measures,
            reward_override,
            transitions,
            rewards,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    pub fn features(&self, state: usize, action: usize) -> &[f64] {
        &self.features[state * self.num_actions + action]
    }

    pub fn reward_weights(&self, step: usize) -> &[f64] {
        &self.reward_weights[step]
    }

    pub fn transition_measure(&self, step: usize, next_state: usize) -> &[f64] {
        &self.transition_measures[step][next_state]
    }

    pub fn reward_override(&self) -> Option<&[f64]> {
        self.reward_override.as_deref()
    }

    pub fn reward(&self, step: usize, state: usize, action: usize) -> f64 {
        self.rewards[(step * self.num_states + state) * self.num_actions + action]
    }

    /// Transition row without bounds checking beyond slice indexing.
    pub fn transition_row(&self, step: usize, state: usize, action: usize) -> &[f64] {
        let start = ((step * self.num_states + state) * self.num_actions + action) * self.num_states;
        &self.transitions[start..start + self.num_states]
    }

    /// Truncation level `H - h` for 0-based step `h`.
    pub fn truncation(&self, step: usize) -> f64 {
        (self.horizon - step) as f64
    }

    fn check_indices(&self, step: usize, state: usize, action: usize) -> Result<(), EnvError> {
        for (what, index, bound) in [
            ("step", step, self.horizon),
            ("state", state, self.num_states),
            ("action", action, self.num_actions),
        ] {
            if index >= bound {
                return Err(EnvError::IndexOutOfRange { what, index, bound });
            }
        }
        Ok(())
    }
}

/// `P_h(· | s, a)` as a probability vector over next states.
pub fn transition_probs(
    mdp: &LinearMdp,
    step: usize,
    state: usize,
    action: usize,
) -> Result<Vec<f64>, EnvError> {
    mdp.check_indices(step, state, action)?;
    Ok(mdp.transition_row(step, state, action).to_vec())
}

/// Synthetic two-state environment.
///
/// Features are `[b_a, δ(s,a), 1 − δ(s,a)]` with `b_a` the 8-bit binary code
/// of `a` (least significant bit first) and `δ(s,a) = 1` iff `s == 0`
/// coincides with `a == 0`. `alpha[h]` flips the destination state of step
/// `h`.
///
/// In [`RewardMode::TabularOverride`] the reward is `r` at `(0, 0)` and
/// `1 − r` elsewhere instead of the linear `φᵀθ_h`.
pub fn build_synthetic_mdp(
    num_actions: usize,
    horizon: usize,
    r: f64,
    alpha: &[bool],
    reward_mode: RewardMode,
) -> Result<LinearMdp, EnvError> {
    const BITS: usize = 8;
    const DIM: usize = BITS + 2;
    if num_actions > 1 << BITS {
        return Err(EnvError::TooManyActions(num_actions));
    }
    if alpha.len() != horizon {
        return Err(EnvError::Invalid(format!(
            "alpha has {} bits, horizon is {horizon}",
            alpha.len()
        )));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(EnvError::Invalid(format!("r must lie in (0, 1), got {r}")));
    }
    let num_states = 2;
    let mut features = Vec::with_capacity(num_states * num_actions);
    for s in 0..num_states {
        for a in 0..num_actions {
            let mut phi = vec![0.0; DIM];
            for (bit, slot) in phi.iter_mut().take(BITS).enumerate() {
                *slot = ((a >> bit) & 1) as f64;
            }
            let delta = synthetic_delta(s, a);
            phi[BITS] = delta;
            phi[BITS + 1] = 1.0 - delta;
            features.push(phi);
        }
    }
    let mut theta = vec![0.0; DIM];
    theta[BITS] = r;
    theta[BITS + 1] = 1.0 - r;
    let transition_measures = alpha
        .iter()
        .map(|&flip| {
            let flip = flip as u8;
            (0..num_states as u8)
                .map(|next| {
                    let mut mu = vec![0.0; DIM];
                    mu[BITS] = ((1 - next) ^ flip) as f64;
                    mu[BITS + 1] = (next ^ flip) as f64;
                    mu
                })
                .collect()
        })
        .collect();
    let reward_override = match reward_mode {
        RewardMode::Feature => None,
        RewardMode::TabularOverride => Some(
            (0..num_states)
                .flat_map(|s| (0..num_actions).map(move |a| (s, a)))
                .map(|(s, a)| if s == 0 && a == 0 { r } else { 1.0 - r })
                .collect(),
        ),
    };
    LinearMdp::new(LinearMdpParts {
        num_states,
        num_actions,
        dim: DIM,
        horizon,
        initial_state: 0,
        features,
        reward_weights: vec![theta; horizon],
        transition_measures,
        reward_override,
    })
}

/// `δ(s, a)` of the synthetic environment.
pub fn synthetic_delta(state: usize, action: usize) -> f64 {
    if (state == 0) == (action == 0) {
        1.0
    } else {
        0.0
    }
}

/// Transition probabilities of the `right` action in RiverSwim.
///
/// Interior states move up with `forward`, stay with `stay` and slip back
/// with `back`. At the left bank the slip mass stays put; at the right bank
/// the forward mass slips back.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiverSwimDynamics {
    pub forward: f64,
    pub stay: f64,
    pub back: f64,
}

impl Default for RiverSwimDynamics {
    fn default() -> Self {
        Self {
            forward: 0.3,
            stay: 0.6,
            back: 0.1,
        }
    }
}

pub const RIVERSWIM_STATES: usize = 5;
pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

pub fn build_riverswim_mdp(horizon: usize) -> Result<LinearMdp, EnvError> {
    build_riverswim_mdp_with(horizon, RiverSwimDynamics::default())
}

/// RiverSwim with one-hot features `φ(s, a) = e_{s·|A| + a}` in `R^10`.
pub fn build_riverswim_mdp_with(
    horizon: usize,
    dynamics: RiverSwimDynamics,
) -> Result<LinearMdp, EnvError> {
    let n = RIVERSWIM_STATES;
    let num_actions = 2;
    let dim = n * num_actions;
    let one_hot = |i: usize| {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        v
    };
    let features: Vec<Vec<f64>> = (0..dim).map(one_hot).collect();

    // table[s][a][s']
    let mut table = vec![vec![vec![0.0; n]; num_actions]; n];
    for s in 0..n {
        table[s][LEFT][s.saturating_sub(1)] = 1.0;
        let RiverSwimDynamics {
            forward,
            stay,
            back,
        } = dynamics;
        let row = &mut table[s][RIGHT];
        if s == 0 {
            row[1] += forward;
            row[0] += stay + back;
        } else if s == n - 1 {
            row[s] += stay;
            row[s - 1] += forward + back;
        } else {
            row[s + 1] += forward;
            row[s] += stay;
            row[s - 1] += back;
        }
    }
    let measure: Vec<Vec<f64>> = (0..n)
        .map(|next| {
            (0..dim)
                .map(|i| table[i / num_actions][i % num_actions][next])
                .collect()
        })
        .collect();
    let mut theta = vec![0.0; dim];
    theta[LEFT] = 0.005;
    theta[(n - 1) * num_actions + RIGHT] = 1.0;

    LinearMdp::new(LinearMdpParts {
        num_states: n,
        num_actions,
        dim,
        horizon,
        initial_state: 0,
        features,
        reward_weights: vec![theta; horizon],
        transition_measures: vec![measure; horizon],
        reward_override: None,
    })
}

/// A (possibly randomized) Markov policy over a finite MDP.
pub trait DecisionRule {
    /// Fill `probs` (length `num_actions`) with the action distribution at
    /// `(step, state)`.
    fn action_probabilities(&self, step: usize, state: usize, probs: &mut [f64]);
}

/// Deterministic policy given as a `[h][s]` action table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabularPolicy {
    pub actions: Vec<Vec<usize>>,
}

impl DecisionRule for TabularPolicy {
    fn action_probabilities(&self, step: usize, state: usize, probs: &mut [f64]) {
        probs.fill(0.0);
        probs[self.actions[step][state]] = 1.0;
    }
}

/// Uniformly random action at every `(h, s)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformPolicy;

impl DecisionRule for UniformPolicy {
    fn action_probabilities(&self, _step: usize, _state: usize, probs: &mut [f64]) {
        let p = 1.0 / probs.len() as f64;
        probs.fill(p);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
}

/// One episode of feedback.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// 1-based episode that generated the trajectory.
    pub origin_episode: usize,
    pub steps: Vec<Transition>,
}

impl Trajectory {
    pub fn total_return(&self) -> f64 {
        self.steps.iter().map(|t| t.reward).sum()
    }
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    if let Some(i) = probs.iter().position(|&p| p == 1.0) {
        return i;
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_positive
}

/// Run one episode from the fixed initial state.
///
/// One-hot action and transition rows consume no randomness, so
/// deterministic MDPs under deterministic policies yield identical
/// trajectories for every stream.
pub fn rollout<P, R>(mdp: &LinearMdp, policy: &P, origin_episode: usize, rng: &mut R) -> Trajectory
where
    P: DecisionRule + ?Sized,
    R: Rng + ?Sized,
{
    let mut probs = vec![0.0; mdp.num_actions()];
    let mut state = mdp.initial_state();
    let mut steps = Vec::with_capacity(mdp.horizon());
    for h in 0..mdp.horizon() {
        policy.action_probabilities(h, state, &mut probs);
        let action = sample_index(&probs, rng);
        let next_state = sample_index(mdp.transition_row(h, state, action), rng);
        steps.push(Transition {
            state,
            action,
            reward: mdp.reward(h, state, action),
            next_state,
        });
        state = next_state;
    }
    Trajectory {
        origin_episode,
        steps,
    }
}

/// `V_h(s)` for `h ∈ 0..=H` and `Q_h(s, a)` for `h ∈ 0..H`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    values: Vec<f64>,
    action_values: Vec<f64>,
}

impl ValueTable {
    pub fn value(&self, step: usize, state: usize) -> f64 {
        self.values[step * self.num_states + state]
    }

    pub fn action_value(&self, step: usize, state: usize, action: usize) -> f64 {
        self.action_values[(step * self.num_states + state) * self.num_actions + action]
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Greedy policy with lowest-index tie-breaking.
    pub fn greedy_policy(&self) -> TabularPolicy {
        let actions = (0..self.horizon)
            .map(|h| {
                (0..self.num_states)
                    .map(|s| {
                        argmax_first(
                            (0..self.num_actions).map(|a| self.action_value(h, s, a)),
                        )
                    })
                    .collect()
            })
            .collect();
        TabularPolicy { actions }
    }
}

/// Index of the first maximal element.
pub fn argmax_first(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

fn expected_next(mdp: &LinearMdp, step: usize, state: usize, action: usize, v_next: &[f64]) -> f64 {
    dot(mdp.transition_row(step, state, action), v_next)
}

/// Backward induction for `V*` and `Q*`.
pub fn exact_optimal_values(mdp: &LinearMdp) -> ValueTable {
    let (ns, na, horizon) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let mut values = vec![0.0; (horizon + 1) * ns];
    let mut action_values = vec![0.0; horizon * ns * na];
    for h in (0..horizon).rev() {
        let (head, tail) = values.split_at_mut((h + 1) * ns);
        let v_next = &tail[..ns];
        for s in 0..ns {
            let mut best = f64::NEG_INFINITY;
            for a in 0..na {
                let q = mdp.reward(h, s, a) + expected_next(mdp, h, s, a, v_next);
                action_values[(h * ns + s) * na + a] = q;
                best = best.max(q);
            }
            head[h * ns + s] = best;
        }
    }
    ValueTable {
        horizon,
        num_states: ns,
        num_actions: na,
        values,
        action_values,
    }
}

/// Exact `V_1^π(s_1)` by backward induction.
pub fn evaluate_policy<P: DecisionRule + ?Sized>(mdp: &LinearMdp, policy: &P) -> f64 {
    let (ns, na) = (mdp.num_states(), mdp.num_actions());
    let mut probs = vec![0.0; na];
    let mut v_next = vec![0.0; ns];
    let mut v = vec![0.0; ns];
    for h in (0..mdp.horizon()).rev() {
        for (s, slot) in v.iter_mut().enumerate() {
            policy.action_probabilities(h, s, &mut probs);
            *slot = probs
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(a, &p)| p * (mdp.reward(h, s, a) + expected_next(mdp, h, s, a, &v_next)))
                .sum();
        }
        std::mem::swap(&mut v, &mut v_next);
    }
    v_next[mdp.initial_state()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn constant_policy(horizon: usize, states: usize, action: usize) -> TabularPolicy {
        TabularPolicy {
            actions: vec![vec![action; states]; horizon],
        }
    }

    #[test]
    fn synthetic_rewards() {
        let mdp = build_synthetic_mdp(20, 3, 0.99, &[false; 3], RewardMode::Feature).unwrap();
        assert!((mdp.reward(0, 0, 0) - 0.99).abs() < 1e-15);
        assert!((mdp.reward(0, 0, 5) - 0.01).abs() < 1e-15);
        // δ(1, a) = 1 for a ≠ 0 as well.
        assert!((mdp.reward(0, 1, 3) - 0.99).abs() < 1e-15);
        assert!((mdp.reward(0, 1, 0) - 0.01).abs() < 1e-15);

        let tab =
            build_synthetic_mdp(20, 3, 0.99, &[false; 3], RewardMode::TabularOverride).unwrap();
        assert_eq!(tab.reward(0, 0, 0), 0.99);
        assert!((tab.reward(0, 1, 3) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn synthetic_features_and_transitions() {
        let mdp =
            build_synthetic_mdp(20, 2, 0.99, &[false, true], RewardMode::Feature).unwrap();
        assert_eq!(mdp.dim(), 10);
        assert_eq!(
            mdp.features(0, 5),
            &[1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]
        );
        assert_eq!(transition_probs(&mdp, 0, 0, 0).unwrap(), vec![1.0, 0.0]);
        assert_eq!(transition_probs(&mdp, 1, 0, 0).unwrap(), vec![0.0, 1.0]);
        assert_eq!(transition_probs(&mdp, 0, 0, 3).unwrap(), vec![0.0, 1.0]);
        assert!(matches!(
            transition_probs(&mdp, 2, 0, 0),
            Err(EnvError::IndexOutOfRange { what: "step", .. })
        ));
        assert!(matches!(
            transition_probs(&mdp, 0, 0, 20),
            Err(EnvError::IndexOutOfRange { what: "action", .. })
        ));
    }

    #[test]
    fn synthetic_action_limit() {
        assert!(build_synthetic_mdp(256, 1, 0.99, &[false], RewardMode::Feature).is_ok());
        assert_eq!(
            build_synthetic_mdp(257, 1, 0.99, &[false], RewardMode::Feature).unwrap_err(),
            EnvError::TooManyActions(257)
        );
    }

    #[test]
    fn riverswim_layout() {
        let mdp = build_riverswim_mdp(20).unwrap();
        let mut e5 = vec![0.0; 10];
        e5[5] = 1.0;
        assert_eq!(mdp.features(2, RIGHT), e5.as_slice());
        assert_eq!(mdp.reward(0, 0, LEFT), 0.005);
        assert_eq!(mdp.reward(7, 4, RIGHT), 1.0);
        assert_eq!(mdp.reward(0, 4, LEFT), 0.0);
        assert_eq!(mdp.reward(0, 2, RIGHT), 0.0);
        assert_eq!(
            transition_probs(&mdp, 0, 3, LEFT).unwrap(),
            vec![0.0, 0.0, 1.0, 0.0, 0.0]
        );
        let p = transition_probs(&mdp, 4, 1, RIGHT).unwrap();
        let expected = [0.1, 0.6, 0.3, 0.0, 0.0];
        for (a, b) in p.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let p0 = transition_probs(&mdp, 0, 0, RIGHT).unwrap();
        assert!((p0[0] - 0.7).abs() < 1e-15 && (p0[1] - 0.3).abs() < 1e-15);
        let p4 = transition_probs(&mdp, 0, 4, RIGHT).unwrap();
        assert!((p4[4] - 0.6).abs() < 1e-15 && (p4[3] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn rows_are_distributions() {
        let mdps = [
            build_riverswim_mdp(4).unwrap(),
            build_synthetic_mdp(50, 4, 0.99, &[true, false, true, true], RewardMode::Feature)
                .unwrap(),
        ];
        for mdp in &mdps {
            for h in 0..mdp.horizon() {
                for s in 0..mdp.num_states() {
                    for a in 0..mdp.num_actions() {
                        let sum: f64 = transition_probs(mdp, h, s, a).unwrap().iter().sum();
                        assert!((sum - 1.0).abs() <= PROB_SUM_TOL);
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_measure_is_rejected() {
        let parts = LinearMdpParts {
            num_states: 2,
            num_actions: 1,
            dim: 1,
            horizon: 1,
            initial_state: 0,
            features: vec![vec![1.0], vec![1.0]],
            reward_weights: vec![vec![0.5]],
            transition_measures: vec![vec![vec![0.7], vec![0.7]]],
            reward_override: None,
        };
        assert!(matches!(
            LinearMdp::new(parts),
            Err(EnvError::InvalidTransition { .. })
        ));
    }

    #[test]
    fn stay_at_zero_rollout() {
        let mdp = build_synthetic_mdp(20, 20, 0.99, &[false; 20], RewardMode::Feature).unwrap();
        let policy = constant_policy(20, 2, 0);
        let a = rollout(&mdp, &policy, 1, &mut ChaCha8Rng::seed_from_u64(1));
        let b = rollout(&mdp, &policy, 1, &mut ChaCha8Rng::seed_from_u64(2));
        assert_eq!(a, b);
        assert!(a.steps.iter().all(|t| t.state == 0));
        assert!((a.total_return() - 20.0 * 0.99).abs() < 1e-12);
    }

    #[test]
    fn optimal_values_synthetic() {
        let mdp = build_synthetic_mdp(20, 20, 0.99, &[false; 20], RewardMode::Feature).unwrap();
        let v = exact_optimal_values(&mdp);
        assert!((v.value(0, 0) - 19.8).abs() < 1e-10);
        for h in 0..=20 {
            for s in 0..2 {
                let x = v.value(h, s);
                assert!((0.0..=(20 - h) as f64 + 1e-12).contains(&x));
            }
        }
    }

    #[test]
    fn single_step_single_state() {
        let parts = LinearMdpParts {
            num_states: 1,
            num_actions: 2,
            dim: 2,
            horizon: 1,
            initial_state: 0,
            features: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            reward_weights: vec![vec![0.2, 0.8]],
            transition_measures: vec![vec![vec![1.0, 1.0]]],
            reward_override: None,
        };
        let mdp = LinearMdp::new(parts).unwrap();
        assert!((exact_optimal_values(&mdp).value(0, 0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn uniform_policy_value() {
        let parts = LinearMdpParts {
            num_states: 1,
            num_actions: 2,
            dim: 2,
            horizon: 10,
            initial_state: 0,
            features: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            reward_weights: vec![vec![0.2, 0.8]; 10],
            transition_measures: vec![vec![vec![1.0, 1.0]]; 10],
            reward_override: None,
        };
        let mdp = LinearMdp::new(parts).unwrap();
        assert!((evaluate_policy(&mdp, &UniformPolicy) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn greedy_policy_attains_optimum() {
        let mdp = build_riverswim_mdp(20).unwrap();
        let v = exact_optimal_values(&mdp);
        let greedy = v.greedy_policy();
        assert!((evaluate_policy(&mdp, &greedy) - v.value(0, 0)).abs() < 1e-10);
        assert!(evaluate_policy(&mdp, &UniformPolicy) <= v.value(0, 0) + 1e-9);
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax_first([0.2, 0.9, 0.9]), 1);
        assert_eq!(argmax_first([2.0, 2.0]), 0);
    }
}
