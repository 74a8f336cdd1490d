//! Posterior-sampling value iteration for finite-horizon linear MDPs whose
//! trajectory feedback arrives after a random number of episodes.
//!
//! * [`numerics`]: dense SPD algebra and Gaussian sampling.
//! * [`environment`]: linear MDPs, the synthetic and RiverSwim benchmarks,
//!   rollouts and exact dynamic programming.
//! * [`delay`]: delay distributions and the feedback buffer.
//! * [`agents`]: the PSVI, Langevin PSVI and UCB planners.
//! * [`harness`]: configuration, the experiment loop and metrics.

pub mod agents;
pub mod delay;
pub mod environment;
pub mod harness;
pub mod numerics;
