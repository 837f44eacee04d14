//! Level generators: uniform random placement and single-edit mutation.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{GridLevel, Heading, Pos};
use crate::error::{Error, Result};

pub use crate::env::{parse_level, serialize_level};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Maximum number of wall cells placed per level.
    pub block_budget: usize,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            block_budget: 15,
            width: 9,
            height: 9,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let cells = self.width * self.height;
        if cells < 2 {
            return Err(Error::Generator(format!(
                "a {}x{} grid cannot hold a start and a goal",
                self.width, self.height
            )));
        }
        if self.block_budget > cells - 2 {
            return Err(Error::Generator(format!(
                "block budget {} exceeds {} free cells minus start and goal",
                self.block_budget, cells
            )));
        }
        Ok(())
    }
}

/// Draws a wall count uniformly in `[0, block_budget]`, scatters that many
/// walls without replacement, then places start and goal on distinct free
/// cells and picks a heading.
pub fn random_level<R: Rng + ?Sized>(config: &GeneratorConfig, rng: &mut R) -> Result<GridLevel> {
    config.validate()?;
    let cells = config.width * config.height;
    let n_walls = rng.random_range(0..=config.block_budget);
    let picked = index::sample(rng, cells, n_walls + 2).into_vec();
    let mut walls = vec![false; cells];
    for &i in &picked[..n_walls] {
        walls[i] = true;
    }
    let at = |i: usize| Pos::new(i % config.width, i / config.width);
    let start = at(picked[n_walls]);
    let goal = at(picked[n_walls + 1]);
    let dir = Heading::from_index(rng.random_range(0..4));
    GridLevel::from_mask(config.width, config.height, walls, start, dir, goal)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    ToggleWall(Pos),
    MoveStart(Pos),
    MoveGoal(Pos),
}

/// Applies one uniformly chosen edit: toggle a wall, relocate the start, or
/// relocate the goal. Edits that are impossible on this level are redrawn.
pub fn mutate_level<R: Rng + ?Sized>(level: &GridLevel, rng: &mut R) -> GridLevel {
    mutate_level_traced(level, rng).0
}

pub fn mutate_level_traced<R: Rng + ?Sized>(level: &GridLevel, rng: &mut R) -> (GridLevel, Mutation) {
    let cells: Vec<Pos> = level.cells().collect();
    loop {
        match rng.random_range(0..3) {
            0 => {
                let choices: Vec<Pos> = cells
                    .iter()
                    .copied()
                    .filter(|&p| p != level.start() && p != level.goal())
                    .collect();
                if choices.is_empty() {
                    continue;
                }
                let p = choices[rng.random_range(0..choices.len())];
                let next = level.toggle_wall(p).expect("toggle of a non-terminal cell");
                return (next, Mutation::ToggleWall(p));
            }
            kind => {
                let choices: Vec<Pos> = cells
                    .iter()
                    .copied()
                    .filter(|&p| !level.is_wall(p) && p != level.start() && p != level.goal())
                    .collect();
                if choices.is_empty() {
                    continue;
                }
                let p = choices[rng.random_range(0..choices.len())];
                return if kind == 1 {
                    let next = level.with_start(p, level.start_dir()).expect("free cell");
                    (next, Mutation::MoveStart(p))
                } else {
                    let next = level.with_goal(p).expect("free cell");
                    (next, Mutation::MoveGoal(p))
                };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_budget_gives_empty_room() {
        let cfg = GeneratorConfig {
            block_budget: 0,
            ..GeneratorConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let l = random_level(&cfg, &mut rng).unwrap();
            assert_eq!(l.wall_count(), 0);
            assert_ne!(l.start(), l.goal());
        }
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let cfg = GeneratorConfig::default();
        let a = random_level(&cfg, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = random_level(&cfg, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_small_grid_or_budget_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tiny = GeneratorConfig {
            width: 1,
            height: 1,
            block_budget: 0,
            seed: 0,
        };
        assert!(random_level(&tiny, &mut rng).is_err());
        let greedy = GeneratorConfig {
            width: 3,
            height: 3,
            block_budget: 8,
            seed: 0,
        };
        assert!(random_level(&greedy, &mut rng).is_err());
        let full = GeneratorConfig {
            block_budget: 7,
            ..greedy
        };
        let l = random_level(&full, &mut rng).unwrap();
        assert!(l.wall_count() <= 7);
    }

    #[test]
    fn mutation_changes_exactly_one_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let base = random_level(&GeneratorConfig::default(), &mut rng).unwrap();
        for _ in 0..300 {
            let (m, kind) = mutate_level_traced(&base, &mut rng);
            let walls_changed = m.walls().collect::<Vec<_>>() != base.walls().collect::<Vec<_>>();
            let start_changed = m.start() != base.start();
            let goal_changed = m.goal() != base.goal();
            let changed = [walls_changed, start_changed, goal_changed].iter().filter(|&&c| c).count();
            assert_eq!(changed, 1, "{kind:?}");
            if let Mutation::ToggleWall(p) = kind {
                assert_eq!(m.toggle_wall(p).unwrap(), base);
            }
        }
    }
}
