//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use diplr::env::{serialize_level, GridLevel};

/// W1 between two uniform 1-D empirical measures: integrates
/// `|F^-1(t) - G^-1(t)|` over the merged quantile breakpoints.
pub fn emd_1d_uniform(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut t = 0.0f64;
    let mut total = 0.0;
    // breakpoints (i + 1) / n and (j + 1) / m compared exactly as
    // (i + 1) * m versus (j + 1) * n
    while i < n && j < m {
        let next_a = (i + 1) * m;
        let next_b = (j + 1) * n;
        let next = next_a.min(next_b) as f64 / (n * m) as f64;
        total += (next - t) * (a[i] - b[j]).abs();
        t = next;
        if next_a == next_b {
            i += 1;
            j += 1;
        } else if next_a < next_b {
            i += 1;
        } else {
            j += 1;
        }
    }
    total
}

/// Positive value loss by the explicit double sum with powers.
pub fn brute_positive_value_loss(td: &[f64], gamma_lambda: f64) -> f64 {
    let t_len = td.len();
    let mut total = 0.0;
    for t in 0..t_len {
        let mut s = 0.0;
        for (k, d) in td.iter().enumerate().skip(t) {
            s += gamma_lambda.powi((k - t) as i32) * d;
        }
        total += s.max(0.0);
    }
    total / t_len as f64
}

/// Reachability by flood fill over the level's text form.
pub fn flood_fill_solvable(level: &GridLevel) -> bool {
    let text = serialize_level(level);
    let grid: Vec<Vec<char>> = text.lines().skip(1).map(|l| l.chars().collect()).collect();
    let h = grid.len();
    let w = grid[0].len();
    let mut seen = vec![vec![false; w]; h];
    let mut stack = Vec::new();
    for (y, row) in grid.iter().enumerate() {
        for (x, &c) in row.iter().enumerate() {
            if c == 'S' {
                stack.push((x, y));
                seen[y][x] = true;
            }
        }
    }
    while let Some((x, y)) = stack.pop() {
        if grid[y][x] == 'G' {
            return true;
        }
        let mut push = |nx: usize, ny: usize| {
            if grid[ny][nx] != '#' && !seen[ny][nx] {
                seen[ny][nx] = true;
                stack.push((nx, ny));
            }
        };
        if x > 0 {
            push(x - 1, y);
        }
        if x + 1 < w {
            push(x + 1, y);
        }
        if y > 0 {
            push(x, y - 1);
        }
        if y + 1 < h {
            push(x, y + 1);
        }
    }
    false
}

/// Rank-power prioritization computed by counting: the average rank of a
/// score is one plus the number of strictly larger scores plus half the
/// number of other equal scores.
pub fn rank_oracle(scores: &[f64], beta: f64) -> Vec<f64> {
    let w: Vec<f64> = scores
        .iter()
        .map(|&s| {
            let larger = scores.iter().filter(|&&o| o > s).count() as f64;
            let equal = scores.iter().filter(|&&o| o == s).count() as f64;
            let rank = 1.0 + larger + (equal - 1.0) / 2.0;
            rank.powf(-beta)
        })
        .collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// Largest relative error, `|analytic - numeric| / max(|analytic|, |numeric|)`
/// in vector norm, between the PPO loss gradient and central finite
/// differences on a 37-parameter network and a random 16-sample batch.
pub fn ppo_gradient_relative_error(seed: u64) -> f64 {
    use diplr::agent::{log_softmax, loss_and_grad, PolicyConfig, PolicyParams, PpoConfig, PpoSamples};
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, StandardNormal};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let cfg = PolicyConfig { hidden: vec![3, 3] };
    let mut params = PolicyParams::new(2, &cfg, &mut rng);
    assert!(params.num_params() <= 50);
    for w in params.weights_mut() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *w = 0.8 * z;
    }
    let n = 16;
    let features: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .collect();
    let actions: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
    let old_log_probs: Vec<f64> = (0..n)
        .map(|i| {
            let fwd = params.forward(&features[i]).unwrap();
            let logp = log_softmax(fwd.logits())[actions[i]];
            // most samples inside the trust region, a few far outside it
            if i % 4 == 0 {
                logp + if rng.random_bool(0.5) { 1.0 } else { -1.0 }
            } else {
                logp + rng.random_range(-0.12..0.12)
            }
        })
        .collect();
    let data = PpoSamples {
        features,
        actions,
        old_log_probs,
        advantages: (0..n).map(|_| StandardNormal.sample(&mut rng)).collect(),
        returns: (0..n).map(|_| rng.random_range(0.0..1.0)).collect(),
    };
    let ppo = PpoConfig::default();
    let idx: Vec<usize> = (0..n).collect();
    let (_, analytic) = loss_and_grad(&params, &data, &idx, &ppo).unwrap();
    let h = 1e-5;
    let mut numeric = vec![0.0; analytic.len()];
    for k in 0..analytic.len() {
        let w0 = params.weights()[k];
        params.weights_mut()[k] = w0 + h;
        let up = loss_and_grad(&params, &data, &idx, &ppo).unwrap().0.total;
        params.weights_mut()[k] = w0 - h;
        let down = loss_and_grad(&params, &data, &idx, &ppo).unwrap().0.total;
        params.weights_mut()[k] = w0;
        numeric[k] = (up - down) / (2.0 * h);
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(&analytic).max(norm(&numeric)).max(1e-12)
}

/// Replay mixture recomputed from scratch: rank oracles for regret and
/// distance, normalized ages for staleness.
pub fn replay_oracle(
    entries: &[&diplr::curriculum::BufferEntry],
    cfg: &diplr::curriculum::TeacherConfig,
    now: u64,
) -> Vec<f64> {
    let regrets: Vec<f64> = entries.iter().map(|e| e.regret_score).collect();
    let dists: Vec<f64> = entries.iter().map(|e| e.distance_score).collect();
    let ages: Vec<f64> = entries.iter().map(|e| (now - e.last_scored_at) as f64).collect();
    let total_age: f64 = ages.iter().sum();
    let n = entries.len() as f64;
    let pd = rank_oracle(&dists, cfg.beta);
    let pr = rank_oracle(&regrets, cfg.beta);
    let rho = cfg.effective_rho();
    (0..entries.len())
        .map(|i| {
            let ps = if total_age == 0.0 { 1.0 / n } else { ages[i] / total_age };
            (1.0 - cfg.staleness_coef) * (rho * pd[i] + (1.0 - rho) * pr[i]) + cfg.staleness_coef * ps
        })
        .collect()
}

#[derive(Debug, Default)]
pub struct FuzzStats {
    pub inserts: usize,
    pub evictions: usize,
    pub rejections: usize,
    pub duplicates: usize,
}

/// Random try_insert traffic against a capacity-8 buffer. Every outcome is
/// checked against [`replay_oracle`]; the first violated invariant is
/// returned as an error.
pub fn buffer_fuzz(ops: u64, seed: u64) -> Result<FuzzStats, String> {
    use diplr::curriculum::{try_insert, BufferEntry, LevelBuffer, Strategy, TeacherConfig};
    use diplr::levelgen::{random_level, GeneratorConfig};
    use rand::{Rng, SeedableRng};

    let capacity = 8;
    let cfg = TeacherConfig {
        strategy: Strategy::Diplr,
        buffer_size: capacity,
        rho: 0.5,
        beta: 0.7,
        staleness_coef: 0.2,
        ..TeacherConfig::default()
    };
    // a small grid so that duplicate levels actually occur
    let gen = GeneratorConfig {
        width: 4,
        height: 4,
        block_budget: 3,
        ..GeneratorConfig::default()
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut buffer = LevelBuffer::new(capacity);
    let mut stats = FuzzStats::default();
    for op in 0..ops {
        let now = op + 1;
        let level = random_level(&gen, &mut rng).map_err(|e| e.to_string())?;
        let mut entry = BufferEntry::new(op, level.clone());
        // coarse values so that ties are common
        entry.regret_score = rng.random_range(0..6) as f64 / 4.0;
        entry.distance_score = rng.random_range(0..6) as f64 / 3.0;
        entry.last_scored_at = now - rng.random_range(0..=now.min(20));
        // replays rescore entries, as in training
        if !buffer.is_empty() && rng.random_bool(0.5) {
            let i = rng.random_range(0..buffer.len());
            let e = buffer.entry_mut(i);
            e.regret_score = rng.random_range(0..6) as f64 / 4.0;
            e.last_scored_at = now;
        }

        let before: Vec<BufferEntry> = buffer.entries().to_vec();
        let was_duplicate = before.iter().any(|e| e.level == level);
        match try_insert(&mut buffer, entry.clone(), &cfg, now) {
            Err(diplr::Error::DuplicateLevel) => {
                if !was_duplicate {
                    return Err(format!("op {op}: fresh level reported as duplicate"));
                }
                if buffer.entries() != &before[..] {
                    return Err(format!("op {op}: rejected duplicate changed the buffer"));
                }
                stats.duplicates += 1;
            }
            Err(e) => return Err(format!("op {op}: {e}")),
            Ok(out) => {
                if was_duplicate {
                    return Err(format!("op {op}: duplicate level accepted"));
                }
                if before.len() < capacity {
                    if !out.inserted || out.evicted.is_some() {
                        return Err(format!("op {op}: insert below capacity did not simply append"));
                    }
                    stats.inserts += 1;
                } else {
                    let all: Vec<&BufferEntry> = before.iter().chain(std::iter::once(&entry)).collect();
                    let probs = replay_oracle(&all, &cfg, now);
                    let lowest = probs[..capacity].iter().copied().fold(f64::INFINITY, f64::min);
                    let cand = probs[capacity];
                    match (out.inserted, out.evicted) {
                        (true, Some(victim)) => {
                            let vi = before
                                .iter()
                                .position(|e| e.id == victim.id)
                                .ok_or(format!("op {op}: evicted an unknown entry"))?;
                            if (probs[vi] - lowest).abs() > 1e-12 {
                                return Err(format!(
                                    "op {op}: evicted p={} but the minimum is {lowest}",
                                    probs[vi]
                                ));
                            }
                            if cand <= lowest - 1e-12 {
                                return Err(format!("op {op}: weaker candidate {cand} displaced {lowest}"));
                            }
                            stats.evictions += 1;
                        }
                        (false, None) => {
                            if cand > lowest + 1e-12 {
                                return Err(format!("op {op}: stronger candidate {cand} rejected"));
                            }
                            if buffer.entries() != &before[..] {
                                return Err(format!("op {op}: rejection changed the buffer"));
                            }
                            stats.rejections += 1;
                        }
                        _ => return Err(format!("op {op}: full buffer inserted without evicting")),
                    }
                }
            }
        }
        if buffer.len() > capacity {
            return Err(format!("op {op}: {} entries exceed capacity {capacity}", buffer.len()));
        }
        for (i, a) in buffer.entries().iter().enumerate() {
            if buffer.entries()[i + 1..].iter().any(|b| b.level == a.level || b.id == a.id) {
                return Err(format!("op {op}: buffer holds a duplicate"));
            }
        }
    }
    Ok(stats)
}
