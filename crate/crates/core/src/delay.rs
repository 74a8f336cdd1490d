//! Episodic delay distributions and the buffer that holds trajectories until
//! their feedback becomes usable.
//!
//! Availability follows the planning indicator: the trajectory of episode `j`
//! with delay `τ_j` enters the statistics used to plan episode `k` iff
//! `j + τ_j ≤ k − 1`, i.e. from episode `j + τ_j + 1` onward.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::Trajectory;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DelayError {
    #[error("invalid delay distribution: {0}")]
    InvalidDistribution(String),
    #[error("planning episode {requested} does not follow episode {previous}")]
    NonMonotoneEpisode { previous: usize, requested: usize },
}

/// Distribution of the per-episode delay `τ`, in episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DelayDistribution {
    Constant { value: u64 },
    Multinomial { values: Vec<u64>, probs: Vec<f64> },
    Poisson { mean: f64 },
    /// Lomax (Pareto type II) with support starting at zero, floored.
    Pareto { shape: f64, scale: f64 },
}

impl DelayDistribution {
    pub fn validate(&self) -> Result<(), DelayError> {
        let bad = |msg: String| Err(DelayError::InvalidDistribution(msg));
        match self {
            Self::Constant { .. } => Ok(()),
            Self::Multinomial { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return bad("multinomial needs matching non-empty values/probs".into());
                }
                if probs.iter().any(|p| !(*p >= 0.0)) {
                    return bad("multinomial probabilities must be non-negative".into());
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return bad(format!("multinomial probabilities sum to {total}"));
                }
                Ok(())
            }
            Self::Poisson { mean } => {
                if *mean > 0.0 && mean.is_finite() {
                    Ok(())
                } else {
                    bad(format!("poisson mean must be positive, got {mean}"))
                }
            }
            Self::Pareto { shape, scale } => {
                if *shape > 0.0 && *scale > 0.0 && shape.is_finite() && scale.is_finite() {
                    Ok(())
                } else {
                    bad(format!("pareto needs positive shape/scale, got {shape}/{scale}"))
                }
            }
        }
    }

    /// Mean delay where it is finite.
    pub fn mean(&self) -> Option<f64> {
        match self {
            Self::Constant { value } => Some(*value as f64),
            Self::Multinomial { values, probs } => {
                Some(values.iter().zip(probs).map(|(v, p)| *v as f64 * p).sum())
            }
            Self::Poisson { mean } => Some(*mean),
            Self::Pareto { shape, scale } => (*shape > 1.0).then(|| scale / (shape - 1.0)),
        }
    }
}

/// Draw one delay. The distribution must already be validated.
pub fn sample_delay<R: Rng + ?Sized>(dist: &DelayDistribution, rng: &mut R) -> u64 {
    match dist {
        DelayDistribution::Constant { value } => *value,
        DelayDistribution::Multinomial { values, probs } => {
            let index = WeightedIndex::new(probs).expect("validated multinomial weights");
            values[index.sample(rng)]
        }
        DelayDistribution::Poisson { mean } => {
            let poisson = Poisson::new(*mean).expect("validated poisson mean");
            poisson.sample(rng) as u64
        }
        DelayDistribution::Pareto { shape, scale } => {
            // 1 - U lies in (0, 1].
            let u = 1.0 - rng.random::<f64>();
            let x = scale * (u.powf(-1.0 / shape) - 1.0);
            // `as` saturates for huge draws.
            x.floor() as u64
        }
    }
}

/// Trajectories waiting for their delay to elapse, plus the arrival log.
#[derive(Debug, Default, Clone)]
pub struct DelayedFeedbackBuffer {
    pending: BTreeMap<usize, Vec<Trajectory>>,
    arrived: Vec<Trajectory>,
    last_release: Option<usize>,
    pushed: usize,
}

impl DelayedFeedbackBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Episode from which a trajectory of `origin` with `delay` is usable.
    pub fn available_from(origin: usize, delay: u64) -> usize {
        let delay = usize::try_from(delay).unwrap_or(usize::MAX);
        origin.saturating_add(delay).saturating_add(1)
    }

    pub fn push_trajectory(&mut self, traj: Trajectory, delay: u64) {
        let from = Self::available_from(traj.origin_episode, delay);
        self.pending.entry(from).or_default().push(traj);
        self.pushed += 1;
    }

    /// Trajectories that become usable when planning episode `k`, ordered by
    /// origin episode. Each trajectory is released exactly once.
    pub fn release_arrivals(&mut self, k: usize) -> Result<Vec<Trajectory>, DelayError> {
        if let Some(previous) = self.last_release {
            if k <= previous {
                return Err(DelayError::NonMonotoneEpisode {
                    previous,
                    requested: k,
                });
            }
        }
        self.last_release = Some(k);
        let later = self.pending.split_off(&(k + 1));
        let ready = std::mem::replace(&mut self.pending, later);
        let mut released: Vec<Trajectory> = ready.into_values().flatten().collect();
        released.sort_by_key(|t| t.origin_episode);
        self.arrived.extend(released.iter().cloned());
        Ok(released)
    }

    pub fn pending_len(&self) -> usize {
        self.pending.values().map(Vec::len).sum()
    }

    pub fn pushed_len(&self) -> usize {
        self.pushed
    }

    /// Every released trajectory, in arrival order.
    pub fn arrived(&self) -> &[Trajectory] {
        &self.arrived
    }
}
