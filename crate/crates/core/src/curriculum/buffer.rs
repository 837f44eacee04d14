use std::collections::HashMap;

use rand::Rng;

use super::priority::{rank_prioritization, staleness_from_ages};
use super::TeacherConfig;
use crate::agent::{self, GaeConfig, PolicyParams, RolloutBudget, RolloutMode, TrajectoryBatch};
use crate::env::{serialize_level, EnvConfig, GridLevel};
use crate::error::{Error, Result};
use crate::ot::{level_distance, DistanceConfig, SampleSet};

/// A level in the replay buffer together with its current scores.
#[derive(Debug, Clone, PartialEq)]
pub struct BufferEntry {
    pub id: u64,
    pub level: GridLevel,
    /// Positive value loss from the latest scoring rollouts.
    pub regret_score: f64,
    /// Distance to the nearest other level in the buffer.
    pub distance_score: f64,
    /// State-action samples from the latest rollouts under the current policy.
    pub samples: Option<SampleSet>,
    pub mean_return: f64,
    pub last_scored_at: u64,
    /// Times this level has been replayed for training.
    pub episode_count: u64,
}

impl BufferEntry {
    pub fn new(id: u64, level: GridLevel) -> Self {
        BufferEntry {
            id,
            level,
            regret_score: 0.0,
            distance_score: 0.0,
            samples: None,
            mean_return: 0.0,
            last_scored_at: 0,
            episode_count: 0,
        }
    }

    pub fn label(&self) -> String {
        level_label(self.id)
    }

    /// Updates regret, return and samples from a rollout batch.
    pub fn rescore(&mut self, batch: &TrajectoryBatch, gae: &GaeConfig, now: u64) -> Result<()> {
        self.regret_score = agent::positive_value_loss(batch, gae)?;
        let returns = batch.episode_returns();
        self.mean_return = returns.iter().sum::<f64>() / returns.len() as f64;
        self.samples = Some(agent::occupancy_samples(batch)?);
        self.last_scored_at = now;
        Ok(())
    }
}

pub fn level_label(id: u64) -> String {
    format!("L{id:06}")
}

/// Capacity-bounded set of replayable levels, plus a cache of pairwise level
/// distances keyed by entry id.
#[derive(Debug, Clone, Default)]
pub struct LevelBuffer {
    entries: Vec<BufferEntry>,
    capacity: usize,
    distances: HashMap<(u64, u64), f64>,
}

fn pair(a: u64, b: u64) -> (u64, u64) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl LevelBuffer {
    pub fn new(capacity: usize) -> Self {
        LevelBuffer {
            entries: Vec::with_capacity(capacity),
            capacity,
            distances: HashMap::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.capacity
    }

    pub fn entries(&self) -> &[BufferEntry] {
        &self.entries
    }

    pub fn entry_mut(&mut self, index: usize) -> &mut BufferEntry {
        &mut self.entries[index]
    }

    pub fn contains_level(&self, level: &GridLevel) -> bool {
        self.entries.iter().any(|e| &e.level == level)
    }

    /// Drops cached distances involving entry `id` (its samples changed).
    pub fn invalidate(&mut self, id: u64) {
        self.distances.retain(|&(a, b), _| a != id && b != id);
    }

    pub fn clear_distance_cache(&mut self) {
        self.distances.clear();
    }

    pub fn cache_distance(&mut self, a: u64, b: u64, d: f64) {
        self.distances.insert(pair(a, b), d);
    }

    pub fn cached_distance(&self, a: u64, b: u64) -> Option<f64> {
        self.distances.get(&pair(a, b)).copied()
    }

    /// Fills missing pairwise distances and sets every entry's
    /// `distance_score` to the distance of its nearest other entry.
    pub fn update_distance_scores(&mut self, cfg: &DistanceConfig) -> Result<()> {
        let n = self.entries.len();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (self.entries[i].id, self.entries[j].id);
                if self.cached_distance(a, b).is_none() {
                    let d = level_distance(samples_of(&self.entries[i])?, samples_of(&self.entries[j])?, cfg)?;
                    self.cache_distance(a, b, d);
                }
            }
        }
        for i in 0..n {
            let id = self.entries[i].id;
            let nearest = self
                .entries
                .iter()
                .filter(|e| e.id != id)
                .map(|e| self.cached_distance(id, e.id).expect("filled above"))
                .fold(f64::INFINITY, f64::min);
            self.entries[i].distance_score = if nearest.is_finite() { nearest } else { 0.0 };
        }
        Ok(())
    }

    /// Full pairwise distance matrix from the cache (after
    /// [`update_distance_scores`](Self::update_distance_scores)).
    pub fn distance_matrix(&self) -> Option<Vec<Vec<f64>>> {
        let n = self.entries.len();
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    out[i][j] = self.cached_distance(self.entries[i].id, self.entries[j].id)?;
                }
            }
        }
        Some(out)
    }

    /// Mean distance over unordered pairs of entries.
    pub fn mean_pairwise_distance(&mut self, cfg: &DistanceConfig) -> Result<f64> {
        self.update_distance_scores(cfg)?;
        let m = self.distance_matrix().expect("cache filled");
        let n = m.len();
        if n < 2 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for (i, row) in m.iter().enumerate() {
            total += row[i + 1..].iter().sum::<f64>();
        }
        Ok(total / (n * (n - 1) / 2) as f64)
    }

    pub(crate) fn push(&mut self, entry: BufferEntry) {
        self.entries.push(entry);
    }

    pub(crate) fn remove(&mut self, index: usize) -> BufferEntry {
        let e = self.entries.remove(index);
        self.invalidate(e.id);
        e
    }
}

fn samples_of(entry: &BufferEntry) -> Result<&SampleSet> {
    entry
        .samples
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument(format!("buffer entry {} has not been scored", entry.label())))
}

/// Distance from `candidate` to every entry, in buffer order.
pub fn distances_to(candidate: &SampleSet, buffer: &LevelBuffer, cfg: &DistanceConfig) -> Result<Vec<f64>> {
    buffer
        .entries
        .iter()
        .map(|e| level_distance(candidate, samples_of(e)?, cfg))
        .collect()
}

/// Minimum distance from `candidate` to the buffer's levels, skipping
/// `exclude` (used to score an entry against the rest of the buffer).
pub fn distance_to_buffer(
    candidate: &SampleSet,
    buffer: &LevelBuffer,
    exclude: Option<usize>,
    cfg: &DistanceConfig,
) -> Result<f64> {
    let mut best: Option<f64> = None;
    for (i, e) in buffer.entries.iter().enumerate() {
        if Some(i) == exclude {
            continue;
        }
        let d = level_distance(candidate, samples_of(e)?, cfg)?;
        best = Some(best.map_or(d, |b: f64| b.min(d)));
    }
    best.ok_or(Error::EmptyComparisonSet)
}

pub fn staleness_weights(buffer: &LevelBuffer, now: u64) -> Result<Vec<f64>> {
    if buffer.is_empty() {
        return Err(Error::InvalidArgument("empty buffer".into()));
    }
    let ages: Vec<u64> = buffer.entries.iter().map(|e| now.saturating_sub(e.last_scored_at)).collect();
    Ok(staleness_from_ages(&ages))
}

/// Mixture of diversity rank, regret rank and staleness distributions.
pub fn replay_probabilities(regrets: &[f64], distances: &[f64], ages: &[u64], cfg: &TeacherConfig) -> Result<Vec<f64>> {
    if regrets.is_empty() {
        return Err(Error::InvalidArgument("empty buffer".into()));
    }
    let rho = cfg.effective_rho();
    let by_distance = rank_prioritization(distances, cfg.beta)?;
    let by_regret = rank_prioritization(regrets, cfg.beta)?;
    let stale = staleness_from_ages(ages);
    let rs = cfg.staleness_coef;
    Ok(by_distance
        .iter()
        .zip(&by_regret)
        .zip(&stale)
        .map(|((d, r), s)| (1.0 - rs) * (rho * d + (1.0 - rho) * r) + rs * s)
        .collect())
}

pub fn replay_distribution(buffer: &LevelBuffer, cfg: &TeacherConfig, now: u64) -> Result<Vec<f64>> {
    let regrets: Vec<f64> = buffer.entries.iter().map(|e| e.regret_score).collect();
    let distances: Vec<f64> = buffer.entries.iter().map(|e| e.distance_score).collect();
    let ages: Vec<u64> = buffer.entries.iter().map(|e| now.saturating_sub(e.last_scored_at)).collect();
    replay_probabilities(&regrets, &distances, &ages, cfg)
}

/// Draws an index from a probability vector.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsertOutcome {
    pub inserted: bool,
    pub evicted: Option<BufferEntry>,
    /// Replay probability the candidate had against the full buffer.
    pub candidate_probability: Option<f64>,
}

/// Inserts while the buffer has room. Once full, the candidate replaces the
/// lowest-probability entry only if its own replay probability (computed
/// over the buffer plus the candidate) is higher.
pub fn try_insert(buffer: &mut LevelBuffer, entry: BufferEntry, cfg: &TeacherConfig, now: u64) -> Result<InsertOutcome> {
    if buffer.contains_level(&entry.level) || buffer.entries.iter().any(|e| e.id == entry.id) {
        return Err(Error::DuplicateLevel);
    }
    if !buffer.is_full() {
        buffer.push(entry);
        return Ok(InsertOutcome {
            inserted: true,
            evicted: None,
            candidate_probability: None,
        });
    }
    let all = buffer.entries.iter().chain(std::iter::once(&entry));
    let regrets: Vec<f64> = all.clone().map(|e| e.regret_score).collect();
    let distances: Vec<f64> = all.clone().map(|e| e.distance_score).collect();
    let ages: Vec<u64> = all.map(|e| now.saturating_sub(e.last_scored_at)).collect();
    let probs = replay_probabilities(&regrets, &distances, &ages, cfg)?;
    let n = buffer.len();
    let candidate = probs[n];
    let (victim, lowest) = probs[..n]
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bp), (i, &p)| if p < bp { (i, p) } else { (bi, bp) });
    if candidate > lowest {
        let evicted = buffer.remove(victim);
        buffer.push(entry);
        Ok(InsertOutcome {
            inserted: true,
            evicted: Some(evicted),
            candidate_probability: Some(candidate),
        })
    } else {
        Ok(InsertOutcome {
            inserted: false,
            evicted: None,
            candidate_probability: Some(candidate),
        })
    }
}

/// Scores a level with stop-gradient rollouts under `policy`.
pub fn score_level<R: Rng + ?Sized>(
    entry: &mut BufferEntry,
    policy: &PolicyParams,
    env_cfg: &EnvConfig,
    gae: &GaeConfig,
    n_episodes: usize,
    now: u64,
    rng: &mut R,
) -> Result<TrajectoryBatch> {
    let batch = agent::collect(
        policy,
        &entry.level,
        &entry.label(),
        env_cfg,
        gae,
        RolloutBudget::Episodes(n_episodes),
        RolloutMode::Score,
        rng,
    )?;
    entry.rescore(&batch, gae, now)?;
    Ok(batch)
}

/// Re-collects every entry's samples under the current policy, rescoring
/// regret and staleness, then recomputes all distance scores when the
/// strategy uses them.
#[allow(clippy::too_many_arguments)]
pub fn refresh_trajectory_buffer<R: Rng + ?Sized>(
    buffer: &mut LevelBuffer,
    policy: &PolicyParams,
    env_cfg: &EnvConfig,
    gae: &GaeConfig,
    cfg: &TeacherConfig,
    now: u64,
    rng: &mut R,
) -> Result<u64> {
    let mut steps = 0;
    for entry in &mut buffer.entries {
        let batch = score_level(entry, policy, env_cfg, gae, cfg.scoring_episodes, now, rng)?;
        steps += batch.len() as u64;
    }
    buffer.clear_distance_cache();
    if cfg.uses_distance() {
        buffer.update_distance_scores(&cfg.distance)?;
    }
    Ok(steps)
}

/// Serialized level text, the buffer's notion of level identity.
pub fn level_key(level: &GridLevel) -> String {
    serialize_level(level)
}
