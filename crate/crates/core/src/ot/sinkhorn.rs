use super::{CostMatrix, SampleSet, TransportPlan};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornConfig {
    /// Entropic regularization strength, in cost units.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Target for the summed absolute row-marginal violation of the
    /// iterates. The returned plan is rounded onto the exact marginals.
    pub tolerance: f64,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        SinkhornConfig {
            epsilon: 1e-2,
            max_iters: 10_000,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornOutput {
    /// Transport cost of the rounded plan raised to `1/p`; an upper bound on
    /// the exact distance.
    pub value: f64,
    pub plan: TransportPlan,
    pub iterations: usize,
    pub residual: f64,
}

const ANNEAL_FACTOR: f64 = 0.5;
const ANNEAL_STAGE_ITERS: usize = 200;
const ANNEAL_STAGE_TOLERANCE: f64 = 1e-4;

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Entropically regularized transport, iterated in the log domain so small
/// `epsilon` stays stable, with the strength annealed down from the largest
/// cost. The converged plan is rounded to satisfy both marginals.
pub fn sinkhorn(p: &SampleSet, q: &SampleSet, exponent: f64, config: &SinkhornConfig) -> Result<SinkhornOutput> {
    if !(config.epsilon > 0.0) {
        return Err(Error::InvalidArgument("sinkhorn epsilon must be positive".into()));
    }
    if !(exponent >= 1.0) {
        return Err(Error::InvalidArgument(format!("wasserstein exponent {exponent} must be >= 1")));
    }
    let cost = CostMatrix::between(p, q, exponent)?;
    let (n, m) = (cost.rows, cost.cols);
    let c = &cost.data;
    let log_a: Vec<f64> = p.weights().iter().map(|w| w.ln()).collect();
    let log_b: Vec<f64> = q.weights().iter().map(|w| w.ln()).collect();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];

    // one sweep of both potentials at strength `eps`; returns the row
    // residual when `check` is set (columns are exact after the g update)
    let sweep = |f: &mut [f64], g: &mut [f64], eps: f64, check: bool| -> f64 {
        for i in 0..n {
            if log_a[i] == f64::NEG_INFINITY {
                f[i] = f64::NEG_INFINITY;
                continue;
            }
            let row = &c[i * m..(i + 1) * m];
            f[i] = eps * log_a[i] - eps * log_sum_exp((0..m).map(|j| (g[j] - row[j]) / eps));
        }
        for j in 0..m {
            if log_b[j] == f64::NEG_INFINITY {
                g[j] = f64::NEG_INFINITY;
                continue;
            }
            g[j] = eps * log_b[j] - eps * log_sum_exp((0..n).map(|i| (f[i] - c[i * m + j]) / eps));
        }
        if !check {
            return f64::NAN;
        }
        (0..n)
            .map(|i| {
                let row: f64 = (0..m).map(|j| ((f[i] + g[j] - c[i * m + j]) / eps).exp()).sum();
                (row - p.weights()[i]).abs()
            })
            .sum()
    };

    // anneal from the largest cost down to the target strength, warm
    // starting the potentials at each stage
    let eps = config.epsilon;
    let c_max = c.iter().copied().fold(0.0, f64::max);
    let mut iterations = 0;
    let mut stage = c_max;
    while stage > eps && iterations + 1 < config.max_iters {
        for k in 1..=ANNEAL_STAGE_ITERS {
            iterations += 1;
            let r = sweep(&mut f, &mut g, stage, k % 10 == 0);
            if (k % 10 == 0 && r < ANNEAL_STAGE_TOLERANCE) || iterations + 1 >= config.max_iters {
                break;
            }
        }
        stage *= ANNEAL_FACTOR;
    }

    let mut residual = f64::INFINITY;
    let mut first = true;
    while iterations < config.max_iters || first {
        first = false;
        iterations += 1;
        if iterations % 10 == 0 || iterations >= config.max_iters {
            residual = sweep(&mut f, &mut g, eps, true);
            if !residual.is_finite() || residual < config.tolerance {
                break;
            }
        } else {
            sweep(&mut f, &mut g, eps, false);
        }
    }
    if !(residual < config.tolerance) {
        return Err(Error::SinkhornDiverged { iterations, residual });
    }
    let mut data: Vec<f64> = (0..n * m)
        .map(|k| ((f[k / m] + g[k % m] - c[k]) / eps).exp())
        .collect();
    round_to_marginals(&mut data, n, m, p.weights(), q.weights());
    let plan = TransportPlan { rows: n, cols: m, data };
    let total = plan.cost(&cost).max(0.0);
    let value = if exponent == 1.0 { total } else { total.powf(1.0 / exponent) };
    Ok(SinkhornOutput {
        value,
        plan,
        iterations,
        residual,
    })
}

/// Projects a near-feasible plan onto the transport polytope: scale down
/// overfull rows, then overfull columns, then spread the missing mass as a
/// rank-one correction.
fn round_to_marginals(data: &mut [f64], n: usize, m: usize, a: &[f64], b: &[f64]) {
    for i in 0..n {
        let row = &mut data[i * m..(i + 1) * m];
        let sum: f64 = row.iter().sum();
        if sum > a[i] {
            let s = a[i] / sum;
            row.iter_mut().for_each(|x| *x *= s);
        }
    }
    for j in 0..m {
        let sum: f64 = (0..n).map(|i| data[i * m + j]).sum();
        if sum > b[j] {
            let s = b[j] / sum;
            (0..n).for_each(|i| data[i * m + j] *= s);
        }
    }
    let err_a: Vec<f64> = (0..n)
        .map(|i| (a[i] - data[i * m..(i + 1) * m].iter().sum::<f64>()).max(0.0))
        .collect();
    let err_b: Vec<f64> = (0..m)
        .map(|j| (b[j] - (0..n).map(|i| data[i * m + j]).sum::<f64>()).max(0.0))
        .collect();
    let missing: f64 = err_a.iter().sum();
    if missing > 0.0 {
        for i in 0..n {
            for j in 0..m {
                data[i * m + j] += err_a[i] * err_b[j] / missing;
            }
        }
    }
}
