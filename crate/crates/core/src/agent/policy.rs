use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::env::Action;
use crate::error::{Error, Result};

/// Outputs of the network: one logit per action plus the value estimate.
pub const OUTPUTS: usize = Action::COUNT + 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub hidden: Vec<usize>,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig { hidden: vec![64, 64] }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() || self.hidden.iter().any(|&h| h == 0) {
            return Err(Error::config("student.hidden", "needs at least one non-empty hidden layer"));
        }
        Ok(())
    }
}

/// Adam moment estimates, kept next to the weights so a checkpoint resumes
/// training exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

/// Weights of a tanh perceptron mapping observation features to action
/// logits and a value estimate.
///
/// Layer `k` stores an `out x in` row-major weight matrix followed by its
/// bias, all in one flat vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub(crate) layers: Vec<usize>,
    pub(crate) weights: Vec<f64>,
    pub(crate) adam: AdamState,
    pub(crate) updates: u64,
}

/// Cached activations of one forward pass; `acts[0]` is the input and the
/// last entry the raw output.
#[derive(Debug, Clone)]
pub struct Forward {
    pub acts: Vec<Vec<f64>>,
}

impl Forward {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("forward has an output layer")
    }

    pub fn logits(&self) -> &[f64] {
        &self.output()[..Action::COUNT]
    }

    pub fn value(&self) -> f64 {
        self.output()[Action::COUNT]
    }
}

impl PolicyParams {
    pub fn new<R: Rng + ?Sized>(input: usize, config: &PolicyConfig, rng: &mut R) -> Self {
        let mut layers = vec![input];
        layers.extend(&config.hidden);
        layers.push(OUTPUTS);
        let mut weights = Vec::with_capacity(count_params(&layers));
        let last = layers.len() - 2;
        for (k, pair) in layers.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let base = 1.0 / (fan_in as f64).sqrt();
            for o in 0..fan_out {
                // small initial logits keep the first policy close to uniform
                let scale = if k == last && o < Action::COUNT { 0.01 * base } else { base };
                for _ in 0..fan_in {
                    let z: f64 = StandardNormal.sample(rng);
                    weights.push(z * scale);
                }
            }
            weights.extend(std::iter::repeat_n(0.0, fan_out));
        }
        Self::from_parts(layers, weights).expect("consistent layout")
    }

    pub fn from_parts(layers: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if layers.len() < 2 || *layers.last().unwrap() != OUTPUTS {
            return Err(Error::Checkpoint(format!(
                "layer sizes {layers:?} must end with {OUTPUTS} outputs"
            )));
        }
        let expected = count_params(&layers);
        if weights.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("policy weights".into()));
        }
        let n = weights.len();
        Ok(PolicyParams {
            layers,
            weights,
            adam: AdamState {
                m: vec![0.0; n],
                v: vec![0.0; n],
                step: 0,
            },
            updates: 0,
        })
    }

    pub fn input_len(&self) -> usize {
        self.layers[0]
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn num_params(&self) -> usize {
        self.weights.len()
    }

    /// Number of PPO updates applied so far.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn forward(&self, input: &[f64]) -> Result<Forward> {
        if input.len() != self.input_len() {
            return Err(Error::DimensionMismatch {
                expected: self.input_len(),
                got: input.len(),
            });
        }
        let mut acts = Vec::with_capacity(self.layers.len());
        acts.push(input.to_vec());
        let mut offset = 0;
        let n_layers = self.layers.len() - 1;
        for k in 0..n_layers {
            let (fan_in, fan_out) = (self.layers[k], self.layers[k + 1]);
            let w = &self.weights[offset..offset + fan_in * fan_out];
            let b = &self.weights[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            let x = &acts[k];
            let mut z: Vec<f64> = w
                .chunks_exact(fan_in)
                .zip(b)
                .map(|(row, &bias)| bias + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            if k + 1 < n_layers {
                z.iter_mut().for_each(|v| *v = v.tanh());
            }
            acts.push(z);
            offset += fan_in * fan_out + fan_out;
        }
        let out = acts.last().unwrap();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network output".into()));
        }
        Ok(Forward { acts })
    }

    /// Accumulates `d loss / d weights` into `grad` given `d loss / d output`.
    pub fn backward(&self, fwd: &Forward, d_output: &[f64], grad: &mut [f64]) {
        let n_layers = self.layers.len() - 1;
        let mut offsets = Vec::with_capacity(n_layers);
        let mut offset = 0;
        for k in 0..n_layers {
            offsets.push(offset);
            offset += self.layers[k] * self.layers[k + 1] + self.layers[k + 1];
        }
        let mut delta = d_output.to_vec();
        for k in (0..n_layers).rev() {
            let (fan_in, fan_out) = (self.layers[k], self.layers[k + 1]);
            let off = offsets[k];
            let x = &fwd.acts[k];
            for o in 0..fan_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let row = &mut grad[off + o * fan_in..off + (o + 1) * fan_in];
                row.iter_mut().zip(x).for_each(|(g, xi)| *g += d * xi);
                grad[off + fan_in * fan_out + o] += d;
            }
            if k > 0 {
                let w = &self.weights[off..off + fan_in * fan_out];
                let mut prev = vec![0.0; fan_in];
                for (o, row) in w.chunks_exact(fan_in).enumerate() {
                    let d = delta[o];
                    if d != 0.0 {
                        prev.iter_mut().zip(row).for_each(|(p, wi)| *p += d * wi);
                    }
                }
                // tanh'(z) = 1 - tanh(z)^2, and acts[k] already holds tanh(z)
                prev.iter_mut()
                    .zip(&fwd.acts[k])
                    .for_each(|(p, a)| *p *= 1.0 - a * a);
                delta = prev;
            }
        }
    }
}

pub(crate) fn count_params(layers: &[usize]) -> usize {
    layers.windows(2).map(|p| p[0] * p[1] + p[1]).sum()
}

/// Numerically stable log-softmax.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    logits.iter().map(|l| l - lse).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActOutput {
    pub action: Action,
    pub log_prob: f64,
    pub value: f64,
}

/// Samples an action from the softmax policy.
pub fn act<R: Rng + ?Sized>(params: &PolicyParams, features: &[f64], rng: &mut R) -> Result<ActOutput> {
    let fwd = params.forward(features)?;
    let logp = log_softmax(fwd.logits());
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut choice = Action::COUNT - 1;
    for (i, lp) in logp.iter().enumerate() {
        acc += lp.exp();
        if u < acc {
            choice = i;
            break;
        }
    }
    Ok(ActOutput {
        action: Action::from_index(choice),
        log_prob: logp[choice],
        value: fwd.value(),
    })
}

/// Highest-logit action (first on ties).
pub fn act_greedy(params: &PolicyParams, features: &[f64]) -> Result<ActOutput> {
    let fwd = params.forward(features)?;
    let logits = fwd.logits();
    let mut best = 0;
    for i in 1..logits.len() {
        if logits[i] > logits[best] {
            best = i;
        }
    }
    let logp = log_softmax(logits);
    Ok(ActOutput {
        action: Action::from_index(best),
        log_prob: logp[best],
        value: fwd.value(),
    })
}
