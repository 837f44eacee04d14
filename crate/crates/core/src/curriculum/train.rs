use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::buffer::{
    distances_to, level_label, refresh_trajectory_buffer, replay_distribution, sample_index, score_level,
    try_insert, BufferEntry, LevelBuffer,
};
use super::{propose_level, Strategy, TeacherConfig};
use crate::agent::{
    collect, positive_value_loss, ppo_update, GaeConfig, LossStats, PolicyConfig, PolicyParams, PpoConfig,
    RolloutBudget, RolloutMode, TrajectoryBatch,
};
use crate::env::{EnvConfig, GridLevel};
use crate::error::Result;
use crate::harness::{SeedStreams, Stream};
use crate::levelgen::{random_level, GeneratorConfig};

/// Everything the training loop needs besides the seed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingSetup {
    pub teacher: TeacherConfig,
    pub env: EnvConfig,
    pub generator: GeneratorConfig,
    pub ppo: PpoConfig,
    pub gae: GaeConfig,
    pub student: PolicyConfig,
    /// Record the buffer's mean pairwise distance every this many PPO updates
    /// (0 disables the probe).
    pub probe_every: u64,
}

impl TrainingSetup {
    pub fn validate(&self) -> Result<()> {
        self.teacher.validate()?;
        self.env.validate()?;
        self.generator.validate()?;
        self.ppo.validate()?;
        self.gae.validate()?;
        self.student.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// A new level was generated and scored; no gradient step.
    Generate,
    /// A buffer level was replayed and the student trained on it.
    Replay,
    /// Bufferless strategies: the proposed level is trained on directly.
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferSummary {
    pub size: usize,
    pub mean_regret: f64,
    pub mean_distance: f64,
    pub mean_staleness: f64,
}

impl BufferSummary {
    fn of(buffer: &LevelBuffer, now: u64) -> Self {
        let n = buffer.len().max(1) as f64;
        let e = buffer.entries();
        BufferSummary {
            size: e.len(),
            mean_regret: e.iter().map(|x| x.regret_score).sum::<f64>() / n,
            mean_distance: e.iter().map(|x| x.distance_score).sum::<f64>() / n,
            mean_staleness: e.iter().map(|x| now.saturating_sub(x.last_scored_at) as f64).sum::<f64>() / n,
        }
    }
}

/// One line of the run log: a single teacher-student loop iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u64,
    pub branch: Branch,
    pub level_id: String,
    pub regret: f64,
    pub distance: Option<f64>,
    pub mean_return: f64,
    pub inserted: bool,
    pub evicted: Option<String>,
    pub buffer: Option<BufferSummary>,
    pub loss: Option<LossStats>,
    pub policy_updates: u64,
    pub env_steps: u64,
    pub buffer_mean_pairwise_distance: Option<f64>,
}

/// The training loop as an explicit state machine: call [`Trainer::step`]
/// once per iteration, or [`Trainer::step_update`] once per PPO update.
#[derive(Debug, Clone)]
pub struct Trainer {
    setup: TrainingSetup,
    policy: PolicyParams,
    buffer: LevelBuffer,
    gen_rng: ChaCha8Rng,
    rollout_rng: ChaCha8Rng,
    ppo_rng: ChaCha8Rng,
    teacher_rng: ChaCha8Rng,
    next_id: u64,
    iteration: u64,
    env_steps: u64,
}

impl Trainer {
    /// Builds the student and, for buffer strategies, fills the buffer with
    /// `buffer_size` distinct scored levels.
    pub fn new(setup: TrainingSetup, seed: u64) -> Result<Self> {
        setup.validate()?;
        let streams = SeedStreams::new(seed);
        let mut setup = setup;
        setup.teacher.distance.seed = streams.seed(Stream::Subsampling);
        let mut init_rng = streams.rng(Stream::Init);
        let policy = PolicyParams::new(setup.env.feature_len(), &setup.student, &mut init_rng);
        let mut trainer = Trainer {
            buffer: LevelBuffer::new(setup.teacher.buffer_size),
            policy,
            gen_rng: streams.rng(Stream::Generation),
            rollout_rng: streams.rng(Stream::Rollout),
            ppo_rng: streams.rng(Stream::Ppo),
            teacher_rng: streams.rng(Stream::Teacher),
            next_id: 0,
            iteration: 0,
            env_steps: 0,
            setup,
        };
        if trainer.setup.teacher.strategy.uses_buffer() {
            trainer.fill_buffer()?;
        }
        Ok(trainer)
    }

    fn fill_buffer(&mut self) -> Result<()> {
        while !self.buffer.is_full() {
            let level = random_level(&self.setup.generator, &mut self.gen_rng)?;
            if self.buffer.contains_level(&level) {
                continue;
            }
            let mut entry = BufferEntry::new(self.take_id(), level);
            let batch = score_level(
                &mut entry,
                &self.policy,
                &self.setup.env,
                &self.setup.gae,
                self.setup.teacher.scoring_episodes,
                0,
                &mut self.rollout_rng,
            )?;
            self.env_steps += batch.len() as u64;
            try_insert(&mut self.buffer, entry, &self.setup.teacher, 0)?;
        }
        if self.setup.teacher.uses_distance() {
            self.buffer.update_distance_scores(&self.setup.teacher.distance)?;
        }
        Ok(())
    }

    fn take_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub fn setup(&self) -> &TrainingSetup {
        &self.setup
    }

    pub fn policy(&self) -> &PolicyParams {
        &self.policy
    }

    pub fn buffer(&self) -> &LevelBuffer {
        &self.buffer
    }

    /// Updates completed so far.
    /// Teacher-student loop iterations completed so far.
    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// PPO updates applied to the student so far.
    pub fn policy_updates(&self) -> u64 {
        self.policy.updates()
    }

    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }

    /// Mean pairwise distance of the current buffer (`None` without one).
    pub fn buffer_mean_pairwise_distance(&mut self) -> Result<Option<f64>> {
        if !self.setup.teacher.strategy.uses_buffer() {
            return Ok(None);
        }
        let cfg = self.setup.teacher.distance.clone();
        self.buffer.mean_pairwise_distance(&cfg).map(Some)
    }

    fn train_on(&mut self, level: &GridLevel, label: &str) -> Result<(TrajectoryBatch, LossStats)> {
        let batch = collect(
            &self.policy,
            level,
            label,
            &self.setup.env,
            &self.setup.gae,
            RolloutBudget::Steps(self.setup.ppo.rollout_steps),
            RolloutMode::Train,
            &mut self.rollout_rng,
        )?;
        self.env_steps += batch.len() as u64;
        let (next, loss) = ppo_update(&self.policy, &batch, &self.setup.ppo, &self.setup.gae, &mut self.ppo_rng)?;
        self.policy = next;
        Ok((batch, loss))
    }

    /// Runs one loop iteration and returns its log record. Direct
    /// strategies and replay iterations apply one PPO update; generate
    /// iterations apply none.
    pub fn step(&mut self) -> Result<IterationRecord> {
        self.iteration += 1;
        // staleness is measured in policy updates
        let now = self.policy.updates();
        let mut record = match self.setup.teacher.strategy {
            Strategy::Dr | Strategy::Minimax => self.step_direct()?,
            _ => self.step_buffer(now)?,
        };
        let updates = self.policy.updates();
        record.policy_updates = updates;
        record.env_steps = self.env_steps;
        let probe = self.setup.probe_every;
        if probe > 0 && record.loss.is_some() && updates % probe == 0 {
            record.buffer_mean_pairwise_distance = self.buffer_mean_pairwise_distance()?;
        }
        if self.setup.teacher.strategy.uses_buffer() {
            record.buffer = Some(BufferSummary::of(&self.buffer, updates));
        }
        Ok(record)
    }

    /// Steps until the next PPO update and returns the records of every
    /// iteration on the way.
    pub fn step_update(&mut self) -> Result<Vec<IterationRecord>> {
        let mut records = Vec::new();
        loop {
            let r = self.step()?;
            let done = r.loss.is_some();
            records.push(r);
            if done {
                return Ok(records);
            }
        }
    }

    fn step_direct(&mut self) -> Result<IterationRecord> {
        let proposal = propose_level(
            &self.setup.teacher,
            &self.setup.generator,
            &self.policy,
            &self.setup.env,
            &self.setup.gae,
            &mut self.gen_rng,
            &mut self.rollout_rng,
        )?;
        self.env_steps += proposal.env_steps;
        let label = level_label(self.take_id());
        let (batch, loss) = self.train_on(&proposal.level, &label)?;
        let returns = batch.episode_returns();
        Ok(IterationRecord {
            iteration: self.iteration,
            branch: Branch::Direct,
            level_id: label,
            regret: positive_value_loss(&batch, &self.setup.gae)?,
            distance: None,
            mean_return: returns.iter().sum::<f64>() / returns.len() as f64,
            inserted: false,
            evicted: None,
            buffer: None,
            loss: Some(loss),
            policy_updates: 0,
            env_steps: 0,
            buffer_mean_pairwise_distance: None,
        })
    }

    fn step_buffer(&mut self, now: u64) -> Result<IterationRecord> {
        let epsilon: f64 = self.teacher_rng.random();
        let generate = epsilon >= self.setup.teacher.replay_threshold;
        let refresh_due = self.iteration % self.setup.teacher.refresh_every == 0;
        let uses_distance = self.setup.teacher.uses_distance();
        let dist_cfg = self.setup.teacher.distance.clone();

        if !generate {
            let probs = replay_distribution(&self.buffer, &self.setup.teacher, now)?;
            let idx = sample_index(&probs, &mut self.teacher_rng);
            let entry = self.buffer.entries()[idx].clone();
            let label = entry.label();
            let (batch, loss) = self.train_on(&entry.level, &label)?;
            {
                let e = self.buffer.entry_mut(idx);
                e.rescore(&batch, &self.setup.gae, now)?;
                e.episode_count += 1;
            }
            self.buffer.invalidate(entry.id);
            if refresh_due {
                self.refresh(now)?;
            } else if uses_distance {
                self.buffer.update_distance_scores(&dist_cfg)?;
            }
            let e = &self.buffer.entries()[idx];
            return Ok(IterationRecord {
                iteration: self.iteration,
                branch: Branch::Replay,
                level_id: label,
                regret: e.regret_score,
                distance: uses_distance.then_some(e.distance_score),
                mean_return: e.mean_return,
                inserted: false,
                evicted: None,
                buffer: None,
                loss: Some(loss),
                policy_updates: 0,
                env_steps: 0,
                buffer_mean_pairwise_distance: None,
            });
        }

        let level = random_level(&self.setup.generator, &mut self.gen_rng)?;
        let mut entry = BufferEntry::new(self.take_id(), level);
        let label = entry.label();
        let batch = score_level(
            &mut entry,
            &self.policy,
            &self.setup.env,
            &self.setup.gae,
            self.setup.teacher.scoring_episodes,
            now,
            &mut self.rollout_rng,
        )?;
        self.env_steps += batch.len() as u64;
        if refresh_due {
            self.refresh(now)?;
        }
        let mut record = IterationRecord {
            iteration: self.iteration,
            branch: Branch::Generate,
            level_id: label,
            regret: entry.regret_score,
            distance: None,
            mean_return: entry.mean_return,
            inserted: false,
            evicted: None,
            buffer: None,
            loss: None,
            policy_updates: 0,
            env_steps: 0,
            buffer_mean_pairwise_distance: None,
        };
        if self.buffer.contains_level(&entry.level) {
            return Ok(record);
        }
        let mut row = Vec::new();
        if uses_distance {
            let samples = entry.samples.as_ref().expect("scored above");
            row = distances_to(samples, &self.buffer, &dist_cfg)?;
            entry.distance_score = row.iter().copied().fold(f64::INFINITY, f64::min);
            record.distance = Some(entry.distance_score);
        }
        let ids: Vec<u64> = self.buffer.entries().iter().map(|e| e.id).collect();
        let id = entry.id;
        let outcome = try_insert(&mut self.buffer, entry, &self.setup.teacher, now)?;
        record.inserted = outcome.inserted;
        record.evicted = outcome.evicted.as_ref().map(|e| e.label());
        if outcome.inserted && uses_distance {
            let evicted = outcome.evicted.map(|e| e.id);
            for (other, d) in ids.into_iter().zip(row) {
                if Some(other) != evicted {
                    self.buffer.cache_distance(id, other, d);
                }
            }
            self.buffer.update_distance_scores(&dist_cfg)?;
        }
        Ok(record)
    }

    fn refresh(&mut self, now: u64) -> Result<()> {
        let steps = refresh_trajectory_buffer(
            &mut self.buffer,
            &self.policy,
            &self.setup.env,
            &self.setup.gae,
            &self.setup.teacher,
            now,
            &mut self.rollout_rng,
        )?;
        self.env_steps += steps;
        Ok(())
    }
}

/// Trains a fresh student for `total_updates` PPO updates and returns it
/// with the record of every loop iteration.
pub fn run_training(setup: TrainingSetup, total_updates: u64, seed: u64) -> Result<(PolicyParams, Vec<IterationRecord>)> {
    let mut trainer = Trainer::new(setup, seed)?;
    let mut log = Vec::with_capacity(total_updates as usize);
    while trainer.policy_updates() < total_updates {
        log.extend(trainer.step_update()?);
    }
    Ok((trainer.policy, log))
}
