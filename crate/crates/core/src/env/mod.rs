//! Partially observable gridworld.
//!
//! The agent has a position and a heading, can turn left, turn right or move
//! forward, and sees a `V x V` egocentric window in front of it. Reaching the
//! goal ends the episode with reward `1 - 0.9 * steps / max_steps`; running
//! out of steps ends it with nothing.

mod ascii;
mod level;

use serde::{Deserialize, Serialize};

pub use ascii::{parse_level, serialize_level, LEVEL_EXTENSION};
pub use level::{is_solvable, GridLevel, Heading, Pos};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Playable width used when generating levels.
    pub width: usize,
    /// Playable height used when generating levels.
    pub height: usize,
    /// Episode horizon.
    pub max_steps: usize,
    /// Side of the egocentric view window; odd and at least 3.
    pub view_size: usize,
    pub discount: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            width: 9,
            height: 9,
            max_steps: 100,
            view_size: 5,
            discount: 0.995,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::config("env.max_steps", "must be at least 1"));
        }
        if self.view_size < 3 || self.view_size % 2 == 0 {
            return Err(Error::config("env.view_size", "must be odd and at least 3"));
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(Error::config("env.discount", "must lie in (0, 1)"));
        }
        if self.width == 0 || self.height == 0 || self.width * self.height < 2 {
            return Err(Error::config("env.width", "grid must hold at least two cells"));
        }
        Ok(())
    }

    /// Length of [`encode_observation`] output.
    pub fn feature_len(&self) -> usize {
        self.view_size * self.view_size * CellKind::COUNT + 4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    TurnLeft,
    TurnRight,
    Forward,
}

impl Action {
    pub const COUNT: usize = 3;
    pub const ALL: [Action; 3] = [Action::TurnLeft, Action::TurnRight, Action::Forward];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Action {
        Action::ALL[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Empty,
    Wall,
    Goal,
}

impl CellKind {
    pub const COUNT: usize = 3;

    fn index(self) -> usize {
        match self {
            CellKind::Empty => 0,
            CellKind::Wall => 1,
            CellKind::Goal => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EnvState {
    pub agent_pos: Pos,
    pub agent_dir: Heading,
    pub steps_taken: usize,
    pub done: bool,
}

/// Egocentric view. `view[r * V + c]`: row 0 is the farthest row ahead, the
/// agent stands at row `V - 1`, column `V / 2`, facing up the window.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Observation {
    pub view_size: usize,
    pub view: Vec<CellKind>,
    pub dir: Heading,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: EnvState,
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
}

pub fn reset(level: &GridLevel, config: &EnvConfig) -> Result<(EnvState, Observation)> {
    level.validate()?;
    let state = EnvState {
        agent_pos: level.start(),
        agent_dir: level.start_dir(),
        steps_taken: 0,
        done: false,
    };
    let obs = observe(&state, level, config);
    Ok((state, obs))
}

pub fn step(state: &EnvState, action: Action, level: &GridLevel, config: &EnvConfig) -> Result<StepOutcome> {
    if state.done {
        return Err(Error::EpisodeDone);
    }
    let mut next = *state;
    next.steps_taken += 1;
    match action {
        Action::TurnLeft => next.agent_dir = state.agent_dir.turn_left(),
        Action::TurnRight => next.agent_dir = state.agent_dir.turn_right(),
        Action::Forward => {
            let (dx, dy) = state.agent_dir.delta();
            if let Some(target) = state.agent_pos.offset(dx, dy, level.width(), level.height()) {
                if !level.is_wall(target) {
                    next.agent_pos = target;
                }
            }
        }
    }
    let mut reward = 0.0;
    if next.agent_pos == level.goal() {
        reward = success_reward(next.steps_taken, config.max_steps);
        next.done = true;
    } else if next.steps_taken >= config.max_steps {
        next.done = true;
    }
    let observation = observe(&next, level, config);
    Ok(StepOutcome {
        state: next,
        observation,
        reward,
        done: next.done,
    })
}

/// Reward for reaching the goal after `steps` steps.
pub fn success_reward(steps: usize, max_steps: usize) -> f64 {
    1.0 - 0.9 * (steps as f64 / max_steps as f64)
}

pub fn observe(state: &EnvState, level: &GridLevel, config: &EnvConfig) -> Observation {
    let v = config.view_size;
    let half = (v / 2) as isize;
    let (fx, fy) = state.agent_dir.delta();
    let (rx, ry) = state.agent_dir.turn_right().delta();
    let mut view = Vec::with_capacity(v * v);
    for r in 0..v {
        let ahead = (v - 1 - r) as isize;
        for c in 0..v {
            let side = c as isize - half;
            let dx = ahead * fx + side * rx;
            let dy = ahead * fy + side * ry;
            let kind = match state.agent_pos.offset(dx, dy, level.width(), level.height()) {
                None => CellKind::Wall,
                Some(p) if level.is_wall(p) => CellKind::Wall,
                Some(p) if p == level.goal() => CellKind::Goal,
                Some(_) => CellKind::Empty,
            };
            view.push(kind);
        }
    }
    Observation {
        view_size: v,
        view,
        dir: state.agent_dir,
    }
}

/// One-hot cell contents followed by a one-hot heading.
pub fn encode_observation(obs: &Observation) -> Vec<f64> {
    let mut out = vec![0.0; obs.view.len() * CellKind::COUNT + 4];
    encode_into(obs, &mut out);
    out
}

pub(crate) fn encode_into(obs: &Observation, out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for (i, cell) in obs.view.iter().enumerate() {
        out[i * CellKind::COUNT + cell.index()] = 1.0;
    }
    out[obs.view.len() * CellKind::COUNT + obs.dir.index()] = 1.0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn room(w: usize, h: usize) -> GridLevel {
        GridLevel::empty(w, h, Pos::new(1, 1), Heading::East, Pos::new(w - 1, h - 1)).unwrap()
    }

    #[test]
    fn reset_places_agent_at_start() {
        let cfg = EnvConfig::default();
        let (s, _) = reset(&room(5, 5), &cfg).unwrap();
        assert_eq!(s.agent_pos, Pos::new(1, 1));
        assert_eq!(s.agent_dir, Heading::East);
        assert_eq!(s.steps_taken, 0);
        assert!(!s.done);
    }

    #[test]
    fn reset_is_deterministic() {
        let cfg = EnvConfig::default();
        let level = room(6, 4);
        assert_eq!(reset(&level, &cfg).unwrap(), reset(&level, &cfg).unwrap());
    }

    #[test]
    fn start_on_wall_is_rejected() {
        let r = GridLevel::new(5, 5, [Pos::new(1, 1)], Pos::new(1, 1), Heading::North, Pos::new(3, 3));
        assert!(matches!(r, Err(Error::InvalidLevel(_))));
        let r = GridLevel::empty(5, 5, Pos::new(7, 1), Heading::North, Pos::new(3, 3));
        assert!(r.is_err());
        let r = GridLevel::empty(5, 5, Pos::new(3, 3), Heading::North, Pos::new(3, 3));
        assert!(r.is_err());
    }

    #[test]
    fn blocked_forward_keeps_position() {
        let cfg = EnvConfig::default();
        let level = GridLevel::new(5, 5, [Pos::new(2, 1)], Pos::new(1, 1), Heading::East, Pos::new(4, 4)).unwrap();
        let (s, _) = reset(&level, &cfg).unwrap();
        let out = step(&s, Action::Forward, &level, &cfg).unwrap();
        assert_eq!(out.state.agent_pos, Pos::new(1, 1));
        assert_eq!(out.reward, 0.0);
        assert!(!out.done);

        // the grid edge blocks too
        let edge = GridLevel::empty(3, 3, Pos::new(0, 0), Heading::North, Pos::new(2, 2)).unwrap();
        let (s, _) = reset(&edge, &cfg).unwrap();
        assert_eq!(step(&s, Action::Forward, &edge, &cfg).unwrap().state.agent_pos, Pos::new(0, 0));
    }

    #[test]
    fn turns_rotate_in_place() {
        let cfg = EnvConfig::default();
        let level = room(5, 5);
        let (s, _) = reset(&level, &cfg).unwrap();
        let r = step(&s, Action::TurnRight, &level, &cfg).unwrap().state;
        assert_eq!(r.agent_dir, Heading::South);
        assert_eq!(r.agent_pos, s.agent_pos);
        let l = step(&s, Action::TurnLeft, &level, &cfg).unwrap().state;
        assert_eq!(l.agent_dir, Heading::North);
    }

    #[test]
    fn timeout_ends_episode_without_reward() {
        let cfg = EnvConfig {
            max_steps: 7,
            ..EnvConfig::default()
        };
        let level = room(5, 5);
        let (mut s, _) = reset(&level, &cfg).unwrap();
        let mut rewards = Vec::new();
        while !s.done {
            let out = step(&s, Action::TurnLeft, &level, &cfg).unwrap();
            rewards.push(out.reward);
            s = out.state;
        }
        assert_eq!(s.steps_taken, 7);
        assert!(rewards.iter().all(|&r| r == 0.0));
        assert!(matches!(step(&s, Action::Forward, &level, &cfg), Err(Error::EpisodeDone)));
    }

    #[test]
    fn success_reward_formula() {
        assert!((success_reward(25, 250) - 0.91).abs() < 1e-12);
        let cfg = EnvConfig {
            max_steps: 40,
            ..EnvConfig::default()
        };
        let level = GridLevel::empty(4, 4, Pos::new(0, 0), Heading::East, Pos::new(1, 0)).unwrap();
        let (s, _) = reset(&level, &cfg).unwrap();
        let out = step(&s, Action::Forward, &level, &cfg).unwrap();
        assert!(out.done);
        assert!((out.reward - (1.0 - 0.9 / 40.0)).abs() < 1e-15);
    }

    #[test]
    fn observation_is_egocentric() {
        let cfg = EnvConfig {
            view_size: 3,
            ..EnvConfig::default()
        };
        // agent at (1,1) facing east, goal directly ahead at (2,1)
        let level = GridLevel::empty(4, 3, Pos::new(1, 1), Heading::East, Pos::new(2, 1)).unwrap();
        let (_, obs) = reset(&level, &cfg).unwrap();
        // row 1 (one step ahead), column 1 (straight ahead)
        assert_eq!(obs.view[3 + 1], CellKind::Goal);
        // agent's own cell is empty
        assert_eq!(obs.view[6 + 1], CellKind::Empty);
        // two ahead, to the left: (3, 0) in the world is in bounds and empty
        assert_eq!(obs.view[0], CellKind::Empty);
        // right side of the agent's row is (1, 2): empty; left side (1, 0): empty
        assert_eq!(obs.view[6 + 2], CellKind::Empty);

        // facing north from the top row: everything ahead is out of bounds
        let top = GridLevel::empty(4, 3, Pos::new(1, 0), Heading::North, Pos::new(3, 2)).unwrap();
        let (_, obs) = reset(&top, &cfg).unwrap();
        assert!(obs.view[..6].iter().all(|&c| c == CellKind::Wall));
    }

    #[test]
    fn encoding_shape_and_injectivity() {
        let cfg = EnvConfig::default();
        let level = room(9, 9);
        let (_, obs) = reset(&level, &cfg).unwrap();
        let f = encode_observation(&obs);
        assert_eq!(f.len(), cfg.feature_len());
        assert_eq!(f.len(), 5 * 5 * 3 + 4);
        assert!(f.iter().all(|&x| x == 0.0 || x == 1.0));
        assert_eq!(f, encode_observation(&obs));

        for slot in 0..obs.view.len() {
            for kind in [CellKind::Empty, CellKind::Wall, CellKind::Goal] {
                if kind == obs.view[slot] {
                    continue;
                }
                let mut other = obs.clone();
                other.view[slot] = kind;
                assert_ne!(encode_observation(&other), f);
            }
        }
        let mut turned = obs.clone();
        turned.dir = Heading::West;
        assert_ne!(encode_observation(&turned), f);
    }

    #[test]
    fn solvability() {
        assert!(room(5, 5).is_solvable());
        let enclosed = GridLevel::new(
            5,
            5,
            [Pos::new(2, 1), Pos::new(1, 2), Pos::new(3, 2), Pos::new(2, 3)],
            Pos::new(0, 0),
            Heading::East,
            Pos::new(2, 2),
        )
        .unwrap();
        assert!(!enclosed.is_solvable());
        assert_eq!(enclosed.shortest_path_len(), None);
        assert_eq!(room(5, 5).shortest_path_len(), Some(6));
    }
}
