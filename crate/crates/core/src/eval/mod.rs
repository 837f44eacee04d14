//! Zero-shot evaluation on held-out mazes and the aggregate statistics used
//! to compare teachers.

mod stats;
mod suite;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use stats::{
    interquartile_range, iqm, median, min_max_normalize, optimality_gap, quantile, AggregateReport, LevelSummary,
};
pub use suite::{read_level_dir, TestSuite};

use crate::agent::{checkpoint, collect, GaeConfig, PolicyParams, RolloutBudget, RolloutMode};
use crate::env::{EnvConfig, GridLevel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub n_episodes: usize,
    /// Sample actions instead of taking the argmax.
    pub stochastic: bool,
    /// Solved-rate range mapped onto `[0, 1]`.
    pub normalize_lo: f64,
    pub normalize_hi: f64,
    pub target: f64,
    /// Suite used for periodic evaluation during training: `standard` or a
    /// directory of level files. Unset disables it.
    pub suite: Option<String>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            n_episodes: 10,
            stochastic: false,
            normalize_lo: 0.0,
            normalize_hi: 1.0,
            target: 1.0,
            suite: None,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_episodes == 0 {
            return Err(Error::config("eval.n_episodes", "must be at least 1"));
        }
        if !(self.normalize_hi > self.normalize_lo) {
            return Err(Error::config("eval.normalize_hi", "must exceed eval.normalize_lo"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: String,
    pub solved_rate: f64,
    pub mean_return: f64,
}

/// Evaluation of one policy on every suite level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub levels: Vec<LevelResult>,
}

impl RunRecord {
    pub fn solved_rates(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.solved_rate).collect()
    }

    /// IQM over the per-level solved rates.
    pub fn iqm(&self) -> Result<f64> {
        iqm(&self.solved_rates())
    }
}

fn run_level(
    policy: &PolicyParams,
    level: &GridLevel,
    n_episodes: usize,
    env_cfg: &EnvConfig,
    stochastic: bool,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64)> {
    if policy.input_len() != env_cfg.feature_len() {
        return Err(Error::DimensionMismatch {
            expected: env_cfg.feature_len(),
            got: policy.input_len(),
        });
    }
    let mode = if stochastic { RolloutMode::Score } else { RolloutMode::Greedy };
    let gae = GaeConfig {
        gamma: env_cfg.discount,
        ..GaeConfig::default()
    };
    let batch = collect(
        policy,
        level,
        "",
        env_cfg,
        &gae,
        RolloutBudget::Episodes(n_episodes),
        mode,
        rng,
    )?;
    let returns = batch.episode_returns();
    Ok((batch.success_rate(), returns.iter().sum::<f64>() / returns.len() as f64))
}

/// Fraction of greedy episodes that reach the goal.
pub fn solved_rate(policy: &PolicyParams, level: &GridLevel, n_episodes: usize, env_cfg: &EnvConfig) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    run_level(policy, level, n_episodes, env_cfg, false, &mut rng).map(|(r, _)| r)
}

/// Evaluates `policy` on every suite level without touching its parameters.
pub fn evaluate_policy(
    policy: &PolicyParams,
    suite: &TestSuite,
    cfg: &EvalConfig,
    env_cfg: &EnvConfig,
    seed: u64,
) -> Result<RunRecord> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels = suite
        .iter()
        .map(|(name, level)| {
            let (solved_rate, mean_return) = run_level(policy, level, cfg.n_episodes, env_cfg, cfg.stochastic, &mut rng)?;
            Ok(LevelResult {
                level: name.to_string(),
                solved_rate,
                mean_return,
            })
        })
        .collect::<Result<_>>()?;
    Ok(RunRecord { seed, levels })
}

pub fn evaluate_checkpoint(
    path: &Path,
    suite: &TestSuite,
    cfg: &EvalConfig,
    env_cfg: &EnvConfig,
    seed: u64,
) -> Result<RunRecord> {
    let policy = checkpoint::load(path)?;
    evaluate_policy(&policy, suite, cfg, env_cfg, seed)
}
