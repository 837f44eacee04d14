//! The student: an actor-critic perceptron trained with PPO.
//!
//! Rollouts produce [`TrajectoryBatch`]es, which feed three consumers: the
//! PPO update, the positive-value-loss level score, and the occupancy samples
//! used for level distances.

pub mod checkpoint;
mod policy;
mod ppo;
mod rollout;
mod scores;

use serde::{Deserialize, Serialize};

pub use policy::{act, act_greedy, log_softmax, ActOutput, AdamState, Forward, PolicyConfig, PolicyParams, OUTPUTS};
pub use ppo::{loss_and_grad, ppo_update, prepare_samples, LossStats, PpoConfig, PpoSamples};
pub use rollout::{collect, collect_trajectories, RolloutBudget, RolloutMode, TrajectoryBatch};
pub use scores::{
    episode_positive_value_loss, gae_advantages, occupancy_samples, positive_value_loss, regret_max_minus_mean,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaeConfig {
    /// MDP discount.
    pub gamma: f64,
    /// GAE discount.
    pub lambda: f64,
}

impl Default for GaeConfig {
    fn default() -> Self {
        GaeConfig {
            gamma: 0.995,
            lambda: 0.95,
        }
    }
}

impl GaeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config("gae.gamma", "must lie in (0, 1]"));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::config("gae.lambda", "must lie in (0, 1]"));
        }
        Ok(())
    }
}
