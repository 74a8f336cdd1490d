//! The episode loop: release feedback, plan, roll out, score, delay.

use rayon::prelude::*;

use crate::agents::Agent;
use crate::delay::{sample_delay, DelayedFeedbackBuffer};
use crate::environment::{evaluate_policy, exact_optimal_values, rollout, LinearMdp, Trajectory};

use super::config::ExperimentConfig;
use super::rng::{substream, AGENT_STREAM, DELAY_STREAM, ROLLOUT_STREAM};
use super::HarnessError;

/// One episode of one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub seed: u64,
    pub episode: usize,
    /// Realized return of the rolled-out trajectory.
    pub realized_return: f64,
    /// Exact `V_1^{π_k}(s_1)`.
    pub policy_value: f64,
    pub regret: f64,
    pub cum_regret: f64,
    /// Delay sampled for this episode's feedback.
    pub delay: u64,
    /// Trajectories released before planning this episode.
    pub arrivals: usize,
}

/// Snapshot handed to [`run_seed_with`] observers after planning episode `k`.
pub struct EpisodeView<'a> {
    pub episode: usize,
    pub mdp: &'a LinearMdp,
    pub agent: &'a Agent,
    pub policy: &'a crate::agents::Policy,
}

/// Run every seed (in parallel) and return rows sorted by `(seed, episode)`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<MetricsRow>, HarnessError> {
    config.validate()?;
    let per_seed: Vec<Vec<MetricsRow>> = config
        .seeds
        .par_iter()
        .map(|&seed| run_seed(config, seed))
        .collect::<Result<_, _>>()?;
    let mut rows: Vec<MetricsRow> = per_seed.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.seed, r.episode));
    Ok(rows)
}

pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<Vec<MetricsRow>, HarnessError> {
    run_seed_with(config, seed, |_| {})
}

/// Single-seed loop with a per-episode observer (used by invariant checks).
pub fn run_seed_with<F>(
    config: &ExperimentConfig,
    seed: u64,
    mut observe: F,
) -> Result<Vec<MetricsRow>, HarnessError>
where
    F: FnMut(&EpisodeView<'_>),
{
    config.validate()?;
    let mdp = config.env.build(config.horizon)?;
    let optimum = exact_optimal_values(&mdp).value(0, mdp.initial_state());
    let (kind, sigma) = config.agent.planner(mdp.dim(), mdp.horizon());
    let mut agent = Agent::new(kind, &mdp, config.lambda, sigma)?;
    let mut buffer = DelayedFeedbackBuffer::new();
    let mut previous: Option<Trajectory> = None;
    let mut cum_regret = 0.0;
    let mut rows = Vec::with_capacity(config.episodes);

    for k in 1..=config.episodes {
        let arrivals = buffer.release_arrivals(k)?;
        agent.ingest_arrivals(&mdp, &arrivals)?;
        if let Some(traj) = previous.take() {
            agent.ingest_shadow(&mdp, std::slice::from_ref(&traj))?;
        }

        let index = k as u64;
        let policy = agent.plan(&mdp, k, &mut substream(seed, AGENT_STREAM, index))?;
        observe(&EpisodeView {
            episode: k,
            mdp: &mdp,
            agent: &agent,
            policy: &policy,
        });
        let traj = rollout(&mdp, &policy, k, &mut substream(seed, ROLLOUT_STREAM, index));
        let policy_value = evaluate_policy(&mdp, &policy);
        let regret = optimum - policy_value;
        cum_regret += regret;
        let delay = sample_delay(&config.delay, &mut substream(seed, DELAY_STREAM, index));

        rows.push(MetricsRow {
            seed,
            episode: k,
            realized_return: traj.total_return(),
            policy_value,
            regret,
            cum_regret,
            delay,
            arrivals: arrivals.len(),
        });
        buffer.push_trajectory(traj.clone(), delay);
        previous = Some(traj);
    }
    Ok(rows)
}

/// `V*_1(s_1)` of the configured environment.
pub fn optimal_value(config: &ExperimentConfig) -> Result<f64, HarnessError> {
    let mdp = config.env.build(config.horizon)?;
    Ok(exact_optimal_values(&mdp).value(0, mdp.initial_state()))
}

/// Mean realized return over the final `fraction` of each seed's episodes,
/// averaged over seeds.
pub fn converged_return(rows: &[MetricsRow], fraction: f64) -> f64 {
    let mut seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
    seeds.dedup();
    let per_seed: Vec<f64> = seeds
        .iter()
        .map(|&seed| {
            let returns: Vec<f64> = rows
                .iter()
                .filter(|r| r.seed == seed)
                .map(|r| r.realized_return)
                .collect();
            let window = ((returns.len() as f64 * fraction).ceil() as usize).clamp(1, returns.len());
            returns[returns.len() - window..].iter().sum::<f64>() / window as f64
        })
        .collect();
    per_seed.iter().sum::<f64>() / per_seed.len() as f64
}

/// Seed-averaged cumulative regret at episode `k`.
pub fn mean_cum_regret_at(rows: &[MetricsRow], k: usize) -> f64 {
    let at_k: Vec<f64> = rows
        .iter()
        .filter(|r| r.episode == k)
        .map(|r| r.cum_regret)
        .collect();
    at_k.iter().sum::<f64>() / at_k.len() as f64
}
