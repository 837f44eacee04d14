use rand::Rng;

use super::{Strategy, TeacherConfig};
use crate::agent::{collect, GaeConfig, PolicyParams, RolloutBudget, RolloutMode};
use crate::env::{EnvConfig, GridLevel};
use crate::error::Result;
use crate::levelgen::{mutate_level, random_level, GeneratorConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub level: GridLevel,
    /// Mean scoring return of every evaluated candidate (minimax only).
    pub candidate_returns: Vec<f64>,
    /// Index of `level` among the candidates.
    pub chosen: usize,
    /// Environment steps spent scoring candidates.
    pub env_steps: u64,
}

/// Draws a new level for the strategy. Buffer strategies and `dr` sample the
/// generator directly. `minimax` runs a search of `minimax_search_budget`
/// candidates, each either a fresh level or a mutation of the current
/// lowest-return one, and keeps the candidate with the lowest mean return.
#[allow(clippy::too_many_arguments)]
pub fn propose_level<G: Rng + ?Sized, R: Rng + ?Sized>(
    cfg: &TeacherConfig,
    generator: &GeneratorConfig,
    policy: &PolicyParams,
    env_cfg: &EnvConfig,
    gae: &GaeConfig,
    gen_rng: &mut G,
    rollout_rng: &mut R,
) -> Result<Proposal> {
    let first = random_level(generator, gen_rng)?;
    if cfg.strategy != Strategy::Minimax || cfg.minimax_search_budget == 1 {
        return Ok(Proposal {
            level: first,
            candidate_returns: Vec::new(),
            chosen: 0,
            env_steps: 0,
        });
    }
    let mut returns = Vec::with_capacity(cfg.minimax_search_budget);
    let mut best = first.clone();
    let mut best_return = f64::INFINITY;
    let mut chosen = 0;
    let mut steps = 0u64;
    let mut candidate = first;
    for k in 0..cfg.minimax_search_budget {
        if k > 0 {
            candidate = if gen_rng.random_bool(0.5) {
                mutate_level(&best, gen_rng)
            } else {
                random_level(generator, gen_rng)?
            };
        }
        let batch = collect(
            policy,
            &candidate,
            "",
            env_cfg,
            gae,
            RolloutBudget::Episodes(cfg.scoring_episodes),
            RolloutMode::Score,
            rollout_rng,
        )?;
        steps += batch.len() as u64;
        let r = batch.episode_returns();
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        returns.push(mean);
        if mean < best_return {
            best_return = mean;
            best = candidate.clone();
            chosen = k;
        }
    }
    Ok(Proposal {
        level: best,
        candidate_returns: returns,
        chosen,
        env_steps: steps,
    })
}
