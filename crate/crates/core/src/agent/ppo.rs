use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::policy::{log_softmax, PolicyParams, OUTPUTS};
use super::rollout::TrajectoryBatch;
use super::scores::gae_advantages;
use super::GaeConfig;
use crate::env::Action;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub clip: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub learning_rate: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    /// Complete episodes are collected until at least this many steps.
    pub rollout_steps: usize,
    pub max_grad_norm: f64,
    pub normalize_advantages: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            clip: 0.2,
            epochs: 4,
            minibatch_size: 64,
            learning_rate: 5e-4,
            value_coef: 0.5,
            entropy_coef: 0.01,
            rollout_steps: 256,
            max_grad_norm: 5.0,
            normalize_advantages: true,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clip > 0.0) {
            return Err(Error::config("ppo.clip", "must be positive"));
        }
        if self.epochs == 0 {
            return Err(Error::config("ppo.epochs", "must be at least 1"));
        }
        if self.minibatch_size == 0 {
            return Err(Error::config("ppo.minibatch_size", "must be at least 1"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::config("ppo.learning_rate", "must be positive"));
        }
        if self.rollout_steps == 0 {
            return Err(Error::config("ppo.rollout_steps", "must be at least 1"));
        }
        if self.value_coef < 0.0 || self.entropy_coef < 0.0 {
            return Err(Error::config("ppo.value_coef", "loss coefficients must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub total: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// Flattened training samples for the clipped surrogate.
#[derive(Debug, Clone)]
pub struct PpoSamples {
    pub features: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub old_log_probs: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl PpoSamples {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Clipped-surrogate loss plus value loss minus entropy bonus, averaged over
/// `idx`, and its gradient with respect to every weight.
pub fn loss_and_grad(
    params: &PolicyParams,
    data: &PpoSamples,
    idx: &[usize],
    cfg: &PpoConfig,
) -> Result<(LossStats, Vec<f64>)> {
    let mut grad = vec![0.0; params.num_params()];
    let mut stats = LossStats::default();
    if idx.is_empty() {
        return Ok((stats, grad));
    }
    let scale = 1.0 / idx.len() as f64;
    let mut d_out = [0.0; OUTPUTS];
    for &i in idx {
        let fwd = params.forward(&data.features[i])?;
        let logp = log_softmax(fwd.logits());
        let probs: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
        let a = data.actions[i];
        let adv = data.advantages[i];
        let log_ratio = logp[a] - data.old_log_probs[i];
        let ratio = log_ratio.exp();
        let unclipped = ratio * adv;
        let clipped = ratio.clamp(1.0 - cfg.clip, 1.0 + cfg.clip) * adv;
        let surrogate = unclipped.min(clipped);
        let d_surr_d_logp = if unclipped <= clipped { unclipped } else { 0.0 };
        let entropy: f64 = -probs.iter().zip(&logp).map(|(p, l)| p * l).sum::<f64>();
        let value = fwd.value();
        let value_err = value - data.returns[i];

        stats.policy_loss -= surrogate * scale;
        stats.value_loss += 0.5 * value_err * value_err * scale;
        stats.entropy += entropy * scale;
        stats.approx_kl += ((ratio - 1.0) - log_ratio) * scale;
        if (ratio - 1.0).abs() > cfg.clip {
            stats.clip_fraction += scale;
        }

        for k in 0..Action::COUNT {
            let indicator = if k == a { 1.0 } else { 0.0 };
            let d_policy = -d_surr_d_logp * (indicator - probs[k]);
            let d_entropy = probs[k] * (logp[k] + entropy);
            d_out[k] = scale * (d_policy + cfg.entropy_coef * d_entropy);
        }
        d_out[Action::COUNT] = scale * cfg.value_coef * value_err;
        params.backward(&fwd, &d_out, &mut grad);
    }
    stats.total = stats.policy_loss + cfg.value_coef * stats.value_loss - cfg.entropy_coef * stats.entropy;
    Ok((stats, grad))
}

/// Builds normalized training samples from a batch collected for training.
pub fn prepare_samples(batch: &TrajectoryBatch, ppo: &PpoConfig, gae: &GaeConfig) -> Result<PpoSamples> {
    let old = batch.log_probs.as_ref().ok_or(Error::ScoringOnlyBatch)?;
    if batch.is_empty() {
        return Err(Error::EmptyBatch("nothing to train on".into()));
    }
    let (mut advantages, returns) = gae_advantages(batch, gae);
    if ppo.normalize_advantages && advantages.len() > 1 {
        let n = advantages.len() as f64;
        let mean = advantages.iter().sum::<f64>() / n;
        let var = advantages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        advantages.iter_mut().for_each(|a| *a = (*a - mean) / (std + 1e-8));
    }
    Ok(PpoSamples {
        features: batch.features.clone(),
        actions: batch.actions.iter().map(|a| a.index()).collect(),
        old_log_probs: old.clone(),
        advantages,
        returns,
    })
}

/// One PPO update: several epochs of shuffled minibatch Adam steps on the
/// clipped surrogate. Returns the updated parameters and losses averaged over
/// minibatches.
pub fn ppo_update<R: Rng + ?Sized>(
    params: &PolicyParams,
    batch: &TrajectoryBatch,
    ppo: &PpoConfig,
    gae: &GaeConfig,
    rng: &mut R,
) -> Result<(PolicyParams, LossStats)> {
    let data = prepare_samples(batch, ppo, gae)?;
    let mut next = params.clone();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut mean = LossStats::default();
    let mut count = 0usize;
    for _ in 0..ppo.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(ppo.minibatch_size) {
            let (stats, mut grad) = loss_and_grad(&next, &data, chunk, ppo)?;
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if !norm.is_finite() {
                return Err(Error::NonFinite(format!(
                    "gradient at update {} (policy loss {}, value loss {})",
                    next.updates, stats.policy_loss, stats.value_loss
                )));
            }
            if ppo.max_grad_norm > 0.0 && norm > ppo.max_grad_norm {
                let s = ppo.max_grad_norm / norm;
                grad.iter_mut().for_each(|g| *g *= s);
            }
            adam_step(&mut next, &grad, ppo.learning_rate);
            mean.policy_loss += stats.policy_loss;
            mean.value_loss += stats.value_loss;
            mean.entropy += stats.entropy;
            mean.total += stats.total;
            mean.approx_kl += stats.approx_kl;
            mean.clip_fraction += stats.clip_fraction;
            count += 1;
        }
    }
    let c = count.max(1) as f64;
    mean.policy_loss /= c;
    mean.value_loss /= c;
    mean.entropy /= c;
    mean.total /= c;
    mean.approx_kl /= c;
    mean.clip_fraction /= c;
    next.updates += 1;
    Ok((next, mean))
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

fn adam_step(params: &mut PolicyParams, grad: &[f64], lr: f64) {
    let adam = &mut params.adam;
    adam.step += 1;
    let t = adam.step as i32;
    let c1 = 1.0 - BETA1.powi(t);
    let c2 = 1.0 - BETA2.powi(t);
    for (((w, g), m), v) in params
        .weights
        .iter_mut()
        .zip(grad)
        .zip(adam.m.iter_mut())
        .zip(adam.v.iter_mut())
    {
        *m = BETA1 * *m + (1.0 - BETA1) * g;
        *v = BETA2 * *v + (1.0 - BETA2) * g * g;
        *w -= lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
    }
}
