use serde::{Deserialize, Serialize};

use super::RunRecord;
use crate::error::{Error, Result};

/// `(s - lo) / (hi - lo)`, clipped to `[0, 1]`.
pub fn min_max_normalize(scores: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(hi > lo) {
        return Err(Error::InvalidArgument(format!("normalization range [{lo}, {hi}] is empty")));
    }
    Ok(scores.iter().map(|s| ((s - lo) / (hi - lo)).clamp(0.0, 1.0)).collect())
}

fn sorted(scores: &[f64]) -> Vec<f64> {
    let mut v = scores.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Interquartile mean: drops `floor(n / 4)` values from each end of the
/// sorted scores and averages the rest.
pub fn iqm(scores: &[f64]) -> Result<f64> {
    if scores.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "interquartile mean needs at least 4 scores, got {}",
            scores.len()
        )));
    }
    let v = sorted(scores);
    let k = v.len() / 4;
    let mid = &v[k..v.len() - k];
    Ok(mid.iter().sum::<f64>() / mid.len() as f64)
}

/// Mean shortfall below `target`.
pub fn optimality_gap(scores: &[f64], target: f64) -> f64 {
    if scores.is_empty() {
        return 0.0;
    }
    scores.iter().map(|s| (target - s).max(0.0)).sum::<f64>() / scores.len() as f64
}

/// Linear-interpolated quantile, `q` in `[0, 1]`.
pub fn quantile(scores: &[f64], q: f64) -> f64 {
    let v = sorted(scores);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn median(scores: &[f64]) -> f64 {
    quantile(scores, 0.5)
}

pub fn interquartile_range(scores: &[f64]) -> f64 {
    quantile(scores, 0.75) - quantile(scores, 0.25)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: String,
    pub median: f64,
    pub iqr: f64,
}

/// Aggregate statistics of one algorithm over its runs. IQM and optimality
/// gap pool the normalized solved rates of every (run, level) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub algorithm: String,
    pub runs: usize,
    pub iqm: f64,
    pub optimality_gap: f64,
    pub levels: Vec<LevelSummary>,
    pub range: (f64, f64),
}

impl AggregateReport {
    pub fn from_runs(algorithm: &str, runs: &[RunRecord], lo: f64, hi: f64, target: f64) -> Result<Self> {
        let first = runs.first().ok_or_else(|| Error::InvalidArgument("no runs to aggregate".into()))?;
        let names: Vec<&str> = first.levels.iter().map(|l| l.level.as_str()).collect();
        let mut pooled = Vec::new();
        let mut per_level = vec![Vec::new(); names.len()];
        for run in runs {
            if run.levels.len() != names.len() || run.levels.iter().zip(&names).any(|(l, n)| l.level != *n) {
                return Err(Error::InvalidArgument(format!(
                    "run with seed {} was evaluated on a different suite",
                    run.seed
                )));
            }
            let rates: Vec<f64> = run.levels.iter().map(|l| l.solved_rate).collect();
            let norm = min_max_normalize(&rates, lo, hi)?;
            for (i, s) in norm.iter().enumerate() {
                per_level[i].push(*s);
            }
            pooled.extend(norm);
        }
        Ok(AggregateReport {
            algorithm: algorithm.to_string(),
            runs: runs.len(),
            iqm: iqm(&pooled)?,
            optimality_gap: optimality_gap(&pooled, target),
            levels: names
                .iter()
                .zip(&per_level)
                .map(|(n, s)| LevelSummary {
                    level: n.to_string(),
                    median: median(s),
                    iqr: interquartile_range(s),
                })
                .collect(),
            range: (lo, hi),
        })
    }
}
