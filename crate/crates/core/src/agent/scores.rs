use super::rollout::TrajectoryBatch;
use super::GaeConfig;
use crate::env::Action;
use crate::error::{Error, Result};
use crate::ot::SampleSet;

/// Positive value loss of one episode's TD errors: the average over steps of
/// the positively clipped discounted tail sums
/// `max(sum_{k >= t} (gamma * lambda)^(k - t) * delta_k, 0)`.
///
/// Divides by the number of steps `T` (the sum runs over `t = 0..T`).
pub fn episode_positive_value_loss(td_errors: &[f64], gamma_lambda: f64) -> f64 {
    if td_errors.is_empty() {
        return 0.0;
    }
    let mut tail = 0.0;
    let mut total = 0.0;
    for &delta in td_errors.iter().rev() {
        tail = delta + gamma_lambda * tail;
        total += tail.max(0.0);
    }
    total / td_errors.len() as f64
}

/// Mean positive value loss over the episodes of a batch. Always `>= 0`.
pub fn positive_value_loss(batch: &TrajectoryBatch, gae: &GaeConfig) -> Result<f64> {
    if batch.num_episodes() == 0 || batch.is_empty() {
        return Err(Error::EmptyBatch("positive value loss needs a complete episode".into()));
    }
    let gl = gae.gamma * gae.lambda;
    let sum: f64 = batch
        .episodes()
        .map(|r| episode_positive_value_loss(&batch.td_errors[r], gl))
        .sum();
    Ok(sum / batch.num_episodes() as f64)
}

/// Best episode return minus mean episode return (undiscounted).
pub fn regret_max_minus_mean(batch: &TrajectoryBatch) -> Result<f64> {
    let returns = batch.episode_returns();
    if returns.len() < 2 {
        return Err(Error::NotEnoughEpisodes {
            needed: 2,
            got: returns.len(),
        });
    }
    let max = returns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = returns.iter().sum::<f64>() / returns.len() as f64;
    Ok((max - mean).max(0.0))
}

/// One state-action point per visited step (observation features followed by
/// a one-hot action), uniformly weighted.
pub fn occupancy_samples(batch: &TrajectoryBatch) -> Result<SampleSet> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch("no steps to sample".into()));
    }
    let points = batch
        .features
        .iter()
        .zip(&batch.actions)
        .map(|(f, a)| {
            let mut p = Vec::with_capacity(f.len() + Action::COUNT);
            p.extend_from_slice(f);
            let mut onehot = [0.0; Action::COUNT];
            onehot[a.index()] = 1.0;
            p.extend_from_slice(&onehot);
            p
        })
        .collect();
    SampleSet::uniform(points)
}

/// Signed GAE advantages and value targets, reset at episode boundaries.
pub fn gae_advantages(batch: &TrajectoryBatch, gae: &GaeConfig) -> (Vec<f64>, Vec<f64>) {
    let n = batch.len();
    let mut adv = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        if batch.dones[t] {
            running = 0.0;
        }
        running = batch.td_errors[t] + gae.gamma * gae.lambda * running;
        adv[t] = running;
    }
    let returns = adv.iter().zip(&batch.values).map(|(a, v)| a + v).collect();
    (adv, returns)
}
