//! Diversity-prioritized level replay.
//!
//! A small laboratory for unsupervised environment design: a partially
//! observable gridworld whose layouts are the free parameters, a PPO student,
//! and teachers that decide which layouts the student trains on. The DIPLR
//! teacher keeps a buffer of levels and replays them according to a mixture of
//! learning potential (positive value loss) and diversity, where diversity is
//! the Wasserstein distance between the state-action samples the current
//! student produces on two levels.
//!
//! Module map:
//!
//! - [`env`]: gridworld levels, dynamics, observations, the ASCII level format
//! - [`levelgen`]: random level generation and single-edit mutation
//! - [`agent`]: actor-critic policy, rollouts, level scores, PPO
//! - [`ot`]: exact and entropic optimal transport, level distance
//! - [`curriculum`]: level buffer, replay distribution, teachers, training loop
//! - [`eval`]: zero-shot test suite, IQM and optimality gap
//! - [`harness`]: experiment config, seeding, run directories, CLI commands
//!
//! Every capability has a runnable program under `examples/`; see the README.

pub mod agent;
pub mod curriculum;
pub mod env;
pub mod error;
pub mod eval;
pub mod harness;
pub mod levelgen;
pub mod ot;

pub use error::{Error, Result};
