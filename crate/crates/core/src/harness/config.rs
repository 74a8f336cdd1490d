//! Experiment configuration (JSON) and the benchmark presets.

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{BonusRule, LmcParams, PlannerKind, StepSize};
use crate::delay::DelayDistribution;
use crate::environment::{
    build_riverswim_mdp_with, build_synthetic_mdp, LinearMdp, RewardMode, RiverSwimDynamics,
};

use super::rng::{substream, ALPHA_STREAM};
use super::HarnessError;

/// Source of the per-step transition flips of the synthetic environment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSpec {
    /// i.i.d. Bernoulli(1/2) bits from the `alpha` substream of this seed.
    Seed(u64),
    /// Explicit bits, one `0`/`1` character per step.
    Bits(String),
}

impl Default for AlphaSpec {
    fn default() -> Self {
        Self::Seed(0)
    }
}

impl AlphaSpec {
    pub fn resolve(&self, horizon: usize) -> Result<Vec<bool>, HarnessError> {
        match self {
            Self::Seed(seed) => {
                let mut rng = substream(*seed, ALPHA_STREAM, 0);
                Ok((0..horizon).map(|_| rng.random::<bool>()).collect())
            }
            Self::Bits(bits) => {
                let parsed = bits
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(HarnessError::Config(format!("bad alpha bit {other:?}"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if parsed.len() != horizon {
                    return Err(HarnessError::Config(format!(
                        "alpha has {} bits, horizon is {horizon}",
                        parsed.len()
                    )));
                }
                Ok(parsed)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvConfig {
    Synthetic {
        num_actions: usize,
        #[serde(default = "default_r")]
        r: f64,
        #[serde(default)]
        alpha: AlphaSpec,
        #[serde(default)]
        reward_mode: RewardMode,
    },
    Riverswim {
        #[serde(default)]
        dynamics: RiverSwimDynamics,
    },
}

fn default_r() -> f64 {
    0.99
}

impl EnvConfig {
    pub fn synthetic(num_actions: usize) -> Self {
        Self::Synthetic {
            num_actions,
            r: default_r(),
            alpha: AlphaSpec::default(),
            reward_mode: RewardMode::Feature,
        }
    }

    pub fn riverswim() -> Self {
        Self::Riverswim {
            dynamics: RiverSwimDynamics::default(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Synthetic { .. } => "synthetic",
            Self::Riverswim { .. } => "riverswim",
        }
    }

    pub fn build(&self, horizon: usize) -> Result<LinearMdp, HarnessError> {
        Ok(match self {
            Self::Synthetic {
                num_actions,
                r,
                alpha,
                reward_mode,
            } => build_synthetic_mdp(*num_actions, horizon, *r, &alpha.resolve(horizon)?, *reward_mode)?,
            Self::Riverswim { dynamics } => build_riverswim_mdp_with(horizon, *dynamics)?,
        })
    }

    /// Feature dimension of the built environment.
    pub fn dim(&self) -> usize {
        10
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentConfig {
    Psvi {
        /// Posterior scale; `√d · H` when absent.
        #[serde(default)]
        nu: Option<f64>,
        #[serde(default = "one")]
        sigma: f64,
        ensemble: usize,
    },
    Lpsvi {
        c_eta: f64,
        iterations: usize,
        temperature: f64,
        ensemble: usize,
        #[serde(default = "yes")]
        warm_start: bool,
    },
    Ucbvi {
        bonus: BonusRule,
    },
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentName {
    Psvi,
    Lpsvi,
    Ucbvi,
}

impl std::str::FromStr for AgentName {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "psvi" => Ok(Self::Psvi),
            "lpsvi" => Ok(Self::Lpsvi),
            "ucbvi" => Ok(Self::Ucbvi),
            other => Err(HarnessError::Config(format!("unknown agent {other:?}"))),
        }
    }
}

impl AgentConfig {
    /// Tuned benchmark values for the given environment.
    pub fn preset(name: AgentName, env: &EnvConfig, horizon: usize) -> Self {
        let riverswim = matches!(env, EnvConfig::Riverswim { .. });
        match (name, riverswim) {
            (AgentName::Psvi, false) => Self::Psvi {
                nu: None,
                sigma: 0.1,
                ensemble: 2,
            },
            (AgentName::Psvi, true) => Self::Psvi {
                nu: Some(1.0),
                sigma: 1.13,
                ensemble: 2,
            },
            (AgentName::Lpsvi, false) => Self::Lpsvi {
                c_eta: 0.5,
                iterations: 40,
                temperature: 0.02,
                ensemble: 2,
                warm_start: true,
            },
            (AgentName::Lpsvi, true) => {
                // γ = c_γ² · d · M · H² with c_γ = 0.005.
                let (c_gamma, ensemble) = (0.005, 2usize);
                let h = horizon as f64;
                Self::Lpsvi {
                    c_eta: 0.5,
                    iterations: 40,
                    temperature: c_gamma * c_gamma * env.dim() as f64 * ensemble as f64 * h * h,
                    ensemble,
                    warm_start: true,
                }
            }
            (AgentName::Ucbvi, false) => Self::Ucbvi {
                bonus: BonusRule::DimensionHorizon { c_beta: 0.1 },
            },
            (AgentName::Ucbvi, true) => Self::Ucbvi {
                bonus: BonusRule::GrowingEpisode { c_beta: 0.04 },
            },
        }
    }

    pub fn name(&self) -> AgentName {
        match self {
            Self::Psvi { .. } => AgentName::Psvi,
            Self::Lpsvi { .. } => AgentName::Lpsvi,
            Self::Ucbvi { .. } => AgentName::Ucbvi,
        }
    }

    /// Planner parameters plus the `σ` of the statistics.
    pub fn planner(&self, dim: usize, horizon: usize) -> (PlannerKind, f64) {
        match *self {
            Self::Psvi {
                nu,
                sigma,
                ensemble,
            } => {
                let nu = nu.unwrap_or_else(|| (dim as f64).sqrt() * horizon as f64);
                (PlannerKind::Psvi { nu, ensemble }, sigma)
            }
            Self::Lpsvi {
                c_eta,
                iterations,
                temperature,
                ensemble,
                warm_start,
            } => (
                PlannerKind::Lpsvi(LmcParams {
                    step_size: StepSize::Scaled { c_eta },
                    iterations,
                    temperature,
                    chains: ensemble,
                    warm_start,
                }),
                1.0,
            ),
            Self::Ucbvi { bonus } => (PlannerKind::Ucbvi(bonus), 1.0),
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: &str| Err(HarnessError::Config(msg.into()));
        match self {
            Self::Psvi {
                nu,
                sigma,
                ensemble,
            } => {
                if nu.is_some_and(|v| !(v >= 0.0)) {
                    return bad("psvi nu must be non-negative");
                }
                if !(*sigma > 0.0) {
                    return bad("psvi sigma must be positive");
                }
                if *ensemble == 0 {
                    return bad("psvi ensemble must be positive");
                }
            }
            Self::Lpsvi {
                c_eta,
                iterations,
                temperature,
                ensemble,
                ..
            } => {
                if !(*c_eta > 0.0) {
                    return bad("lpsvi c_eta must be positive");
                }
                if *iterations == 0 || *ensemble == 0 {
                    return bad("lpsvi iterations and ensemble must be positive");
                }
                if !(*temperature >= 0.0) {
                    return bad("lpsvi temperature must be non-negative");
                }
            }
            Self::Ucbvi { bonus } => {
                let c = match *bonus {
                    BonusRule::DimensionHorizon { c_beta } => c_beta,
                    BonusRule::GrowingEpisode { c_beta } => c_beta,
                    BonusRule::Constant { beta } => beta,
                };
                if !(c >= 0.0) {
                    return bad("ucbvi bonus must be non-negative");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    pub agent: AgentConfig,
    pub delay: DelayDistribution,
    pub episodes: usize,
    pub horizon: usize,
    pub seeds: Vec<u64>,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::synthetic_benchmark(AgentName::Psvi, DelayDistribution::Poisson { mean: 50.0 })
    }
}

impl ExperimentConfig {
    /// `|S| = 2, |A| = 20, d = 10, H = 20`, 5000 episodes, 10 seeds.
    pub fn synthetic_benchmark(agent: AgentName, delay: DelayDistribution) -> Self {
        let env = EnvConfig::synthetic(20);
        let horizon = 20;
        Self {
            agent: AgentConfig::preset(agent, &env, horizon),
            env,
            delay,
            episodes: 5000,
            horizon,
            seeds: (0..10).collect(),
            lambda: 1.0,
            output: None,
        }
    }

    /// RiverSwim with `H = 20`, Poisson(5) delays, 3000 episodes, 5 seeds.
    pub fn riverswim_benchmark(agent: AgentName) -> Self {
        let env = EnvConfig::riverswim();
        let horizon = 20;
        Self {
            agent: AgentConfig::preset(agent, &env, horizon),
            env,
            delay: DelayDistribution::Poisson { mean: 5.0 },
            episodes: 3000,
            horizon,
            seeds: (0..5).collect(),
            lambda: 1.0,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.episodes == 0 {
            return Err(HarnessError::Config("episodes must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(HarnessError::Config("horizon must be at least 1".into()));
        }
        if !(self.lambda > 0.0) {
            return Err(HarnessError::Config("lambda must be positive".into()));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("at least one seed is required".into()));
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return Err(HarnessError::Config("seeds must be distinct".into()));
        }
        self.delay.validate()?;
        self.agent.validate()?;
        Ok(())
    }
}
