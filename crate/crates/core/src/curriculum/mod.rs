//! The teacher: a level buffer scored by regret, diversity and staleness,
//! the replay distribution over it, and the training loop that ties the
//! student, the generator and the buffer together.
//!
//! Five strategies share the loop:
//!
//! | strategy      | new levels            | replay priority            |
//! |---------------|-----------------------|----------------------------|
//! | `dr`          | uniform random        | none, trains on each level |
//! | `minimax`     | lowest-return search  | none, trains on each level |
//! | `plr`         | uniform random        | regret rank + staleness    |
//! | `diplr_minus` | uniform random        | distance rank + staleness  |
//! | `diplr`       | uniform random        | mixture of both + staleness|

mod buffer;
mod priority;
mod teacher;
mod train;

use serde::{Deserialize, Serialize};

pub use buffer::{
    distance_to_buffer, distances_to, level_key, level_label, refresh_trajectory_buffer, replay_distribution,
    replay_probabilities, sample_index, score_level, staleness_weights, try_insert, BufferEntry, InsertOutcome,
    LevelBuffer,
};
pub use priority::{average_ranks, rank_prioritization, staleness_from_ages};
pub use teacher::{propose_level, Proposal};
pub use train::{run_training, Branch, BufferSummary, Trainer, TrainingSetup, IterationRecord};

use crate::error::{Error, Result};
use crate::ot::DistanceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Dr,
    Minimax,
    Plr,
    DiplrMinus,
    Diplr,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Dr,
        Strategy::Minimax,
        Strategy::Plr,
        Strategy::DiplrMinus,
        Strategy::Diplr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Dr => "dr",
            Strategy::Minimax => "minimax",
            Strategy::Plr => "plr",
            Strategy::DiplrMinus => "diplr_minus",
            Strategy::Diplr => "diplr",
        }
    }

    pub fn parse(s: &str) -> Option<Strategy> {
        Strategy::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Whether the strategy keeps a replay buffer.
    pub fn uses_buffer(self) -> bool {
        matches!(self, Strategy::Plr | Strategy::DiplrMinus | Strategy::Diplr)
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TeacherConfig {
    pub strategy: Strategy,
    /// Weight of the diversity ranking against the regret ranking (`diplr`).
    pub rho: f64,
    /// Rank temperature.
    pub beta: f64,
    /// Weight of the staleness distribution.
    pub staleness_coef: f64,
    /// A uniform draw at or above this value generates a new level; below
    /// it, a buffer level is replayed.
    pub replay_threshold: f64,
    pub buffer_size: usize,
    pub minimax_search_budget: usize,
    /// Stop-gradient episodes used to score a level.
    pub scoring_episodes: usize,
    /// Re-collect samples and rescore the whole buffer every this many
    /// updates.
    pub refresh_every: u64,
    pub distance: DistanceConfig,
}

impl Default for TeacherConfig {
    fn default() -> Self {
        TeacherConfig {
            strategy: Strategy::Diplr,
            rho: 0.5,
            beta: 1.0,
            staleness_coef: 0.1,
            replay_threshold: 0.5,
            buffer_size: 32,
            minimax_search_budget: 8,
            scoring_episodes: 4,
            refresh_every: 1,
            distance: DistanceConfig::default(),
        }
    }
}

impl TeacherConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::config("teacher.rho", "must lie in [0, 1]"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config("teacher.beta", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.staleness_coef) {
            return Err(Error::config("teacher.staleness_coef", "must lie in [0, 1)"));
        }
        // a zero threshold never replays, so buffer strategies would never train
        if !(self.replay_threshold > 0.0 && self.replay_threshold <= 1.0) {
            return Err(Error::config("teacher.replay_threshold", "must lie in (0, 1]"));
        }
        if self.buffer_size == 0 {
            return Err(Error::config("teacher.buffer_size", "must be at least 1"));
        }
        if self.minimax_search_budget == 0 {
            return Err(Error::config("teacher.minimax_search_budget", "must be at least 1"));
        }
        if self.scoring_episodes == 0 {
            return Err(Error::config("teacher.scoring_episodes", "must be at least 1"));
        }
        if self.refresh_every == 0 {
            return Err(Error::config("teacher.refresh_every", "must be at least 1"));
        }
        self.distance.validate()
    }

    /// Diversity weight actually used by the strategy: 0 for `plr`, 1 for
    /// `diplr_minus`, `rho` otherwise.
    pub fn effective_rho(&self) -> f64 {
        match self.strategy {
            Strategy::Plr => 0.0,
            Strategy::DiplrMinus => 1.0,
            _ => self.rho,
        }
    }

    /// Whether replay depends on distance scores at all.
    pub fn uses_distance(&self) -> bool {
        self.strategy.uses_buffer() && self.effective_rho() > 0.0
    }
}
