use rand::Rng;

use super::policy::{act, act_greedy, PolicyParams};
use super::GaeConfig;
use crate::env::{self, encode_observation, Action, EnvConfig, GridLevel};
use crate::error::{Error, Result};

/// Per-step rollout data for one level, stored column-wise.
///
/// Episodes are contiguous; `episode_ends[e]` is the exclusive end index of
/// episode `e`. Every episode runs to termination, so the last step of each
/// episode has `dones == true`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBatch {
    pub level_id: String,
    pub features: Vec<Vec<f64>>,
    pub actions: Vec<Action>,
    /// Behaviour log-probabilities; `None` for scoring-only batches, which
    /// cannot feed a gradient update.
    pub log_probs: Option<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
    pub td_errors: Vec<f64>,
    pub episode_ends: Vec<usize>,
    pub gamma: f64,
}

impl TrajectoryBatch {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn num_episodes(&self) -> usize {
        self.episode_ends.len()
    }

    pub fn episodes(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        let mut start = 0;
        self.episode_ends.iter().map(move |&end| {
            let r = start..end;
            start = end;
            r
        })
    }

    /// Undiscounted return of each episode.
    pub fn episode_returns(&self) -> Vec<f64> {
        self.episodes().map(|r| self.rewards[r].iter().sum()).collect()
    }

    /// Fraction of episodes that ended with a positive reward.
    pub fn success_rate(&self) -> f64 {
        if self.episode_ends.is_empty() {
            return 0.0;
        }
        let solved = self.episode_returns().iter().filter(|&&r| r > 0.0).count();
        solved as f64 / self.episode_ends.len() as f64
    }

    /// Recomputes `r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)`.
    pub fn recompute_td_errors(&self) -> Vec<f64> {
        compute_td_errors(&self.rewards, &self.values, &self.dones, self.gamma)
    }

    pub fn has_gradient_data(&self) -> bool {
        self.log_probs.is_some()
    }
}

pub(crate) fn compute_td_errors(rewards: &[f64], values: &[f64], dones: &[bool], gamma: f64) -> Vec<f64> {
    (0..rewards.len())
        .map(|t| {
            let next = if dones[t] || t + 1 == rewards.len() { 0.0 } else { values[t + 1] };
            rewards[t] + gamma * next - values[t]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RolloutBudget {
    /// Exactly this many complete episodes.
    Episodes(usize),
    /// Complete episodes until at least this many steps were taken.
    Steps(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RolloutMode {
    /// Keep behaviour log-probabilities for a PPO update.
    Train,
    /// Stop-gradient scoring pass: log-probabilities are dropped.
    Score,
    /// Argmax actions, used for evaluation.
    Greedy,
}

/// Runs complete episodes of `params` on `level`.
pub fn collect<R: Rng + ?Sized>(
    params: &PolicyParams,
    level: &GridLevel,
    level_id: &str,
    env_cfg: &EnvConfig,
    gae: &GaeConfig,
    budget: RolloutBudget,
    mode: RolloutMode,
    rng: &mut R,
) -> Result<TrajectoryBatch> {
    match budget {
        RolloutBudget::Episodes(0) => return Err(Error::InvalidArgument("n_episodes must be at least 1".into())),
        RolloutBudget::Steps(0) => return Err(Error::InvalidArgument("step budget must be at least 1".into())),
        _ => {}
    }
    let mut batch = TrajectoryBatch {
        level_id: level_id.to_string(),
        features: Vec::new(),
        actions: Vec::new(),
        log_probs: None,
        rewards: Vec::new(),
        values: Vec::new(),
        dones: Vec::new(),
        td_errors: Vec::new(),
        episode_ends: Vec::new(),
        gamma: gae.gamma,
    };
    let mut log_probs = Vec::new();
    loop {
        let (mut state, mut obs) = env::reset(level, env_cfg)?;
        while !state.done {
            let features = encode_observation(&obs);
            let out = match mode {
                RolloutMode::Greedy => act_greedy(params, &features)?,
                _ => act(params, &features, rng)?,
            };
            let step = env::step(&state, out.action, level, env_cfg)?;
            batch.features.push(features);
            batch.actions.push(out.action);
            log_probs.push(out.log_prob);
            batch.rewards.push(step.reward);
            batch.values.push(out.value);
            batch.dones.push(step.done);
            state = step.state;
            obs = step.observation;
        }
        batch.episode_ends.push(batch.actions.len());
        let finished = match budget {
            RolloutBudget::Episodes(n) => batch.episode_ends.len() >= n,
            RolloutBudget::Steps(n) => batch.actions.len() >= n,
        };
        if finished {
            break;
        }
    }
    batch.td_errors = batch.recompute_td_errors();
    if mode == RolloutMode::Train {
        batch.log_probs = Some(log_probs);
    }
    Ok(batch)
}

/// Episode-count rollout; `update_policy = false` gives a stop-gradient
/// scoring batch.
pub fn collect_trajectories<R: Rng + ?Sized>(
    params: &PolicyParams,
    level: &GridLevel,
    env_cfg: &EnvConfig,
    gae: &GaeConfig,
    n_episodes: usize,
    update_policy: bool,
    rng: &mut R,
) -> Result<TrajectoryBatch> {
    let mode = if update_policy { RolloutMode::Train } else { RolloutMode::Score };
    collect(
        params,
        level,
        "",
        env_cfg,
        gae,
        RolloutBudget::Episodes(n_episodes),
        mode,
        rng,
    )
}
