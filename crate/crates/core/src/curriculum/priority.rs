use crate::error::{Error, Result};

/// 1-based descending ranks; tied scores share the average of their ranks.
pub fn average_ranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; scores.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    ranks
}

/// Rank-based prioritization: `P_i ∝ rank_i^(-beta)`, rank 1 for the largest
/// score.
pub fn rank_prioritization(scores: &[f64], beta: f64) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument("cannot prioritize an empty score list".into()));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("temperature beta {beta} must be positive")));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("priority scores".into()));
    }
    let ranks = average_ranks(scores);
    // relative to the best rank, so a full tie gives exactly 1/n
    let top = ranks.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = ranks.iter().map(|r| (r / top).powf(-beta)).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.iter().map(|w| w / total).collect())
}

/// Normalized ages; all-zero ages give the uniform vector.
pub fn staleness_from_ages(ages: &[u64]) -> Vec<f64> {
    let n = ages.len();
    let total: u64 = ages.iter().sum();
    if total == 0 {
        return vec![1.0 / n as f64; n];
    }
    ages.iter().map(|&a| a as f64 / total as f64).collect()
}
