//! Experiment orchestration: configuration, the episode loop, regret
//! accounting and CSV output.

pub mod config;
pub mod metrics;
pub mod rng;
pub mod runner;
pub mod theory;

use thiserror::Error;

use crate::agents::AgentError;
use crate::delay::DelayError;
use crate::environment::EnvError;

pub use config::{AgentConfig, AgentName, AlphaSpec, EnvConfig, ExperimentConfig};
pub use metrics::{read_metrics, write_metrics, write_metrics_to};
pub use runner::{
    converged_return, mean_cum_regret_at, optimal_value, run_experiment, run_seed, run_seed_with,
    EpisodeView, MetricsRow,
};
pub use theory::{theoretical_params, TheoreticalParams};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Delay(#[from] DelayError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
