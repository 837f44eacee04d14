use std::path::Path;

use crate::env::{parse_level, GridLevel, LEVEL_EXTENSION};
use crate::error::{Error, Result};

const FOUR_ROOMS: &str = "dir: east
....#....
.S.......
....#....
....#....
##.###.##
....#....
....#..G.
.........
....#....
";

const LABYRINTH: &str = "dir: east
.........
.S.#.....
.###.###.
...#...#.
.#...#.#.
.#.###.#.
.#...#...
.###.#.G.
.........
";

const SPIRAL: &str = "dir: west
.........
.#######.
.#.....#.
.#.###.#.
.#.#G..#.
.#.#####.
.#.......
.#.....S.
.#.......
";

const LONG_CORRIDOR: &str = "dir: east
.........
..S......
.........
######...
.........
.........
...######
.........
.......G.
";

const SIXTEEN_ROOMS: &str = "dir: south
..#...#..
S.#.....#
.......#.
##.##.#.#
..#......
.....#.##
#.#.##...
..#...#.G
..#......
";

const DEAD_END_MAZE: &str = "dir: east
S....#...
.###.#.#.
...#...#.
.#.#####.
.#.......
.#####.#.
.....#.#.
.###.#.#G
.........
";

const PERFECT_MAZE: &str = "dir: south
S.#......
..#.###..
..#...#..
.####.#..
......#..
.######..
.......#.
.#####.#.
.....#..G
";

const OPEN_FIELD: &str = "dir: east
.........
.S.......
.........
.........
.........
.........
.........
.......G.
.........
";

/// Named held-out levels for zero-shot evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSuite {
    levels: Vec<(String, GridLevel)>,
}

impl TestSuite {
    /// Checks that names are unique and every level is solvable.
    pub fn new(levels: Vec<(String, GridLevel)>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidArgument("test suite is empty".into()));
        }
        for (i, (name, level)) in levels.iter().enumerate() {
            if levels[..i].iter().any(|(n, _)| n == name) {
                return Err(Error::InvalidArgument(format!("duplicate test level name `{name}`")));
            }
            level.validate()?;
            if !level.is_solvable() {
                return Err(Error::InvalidLevel(format!("test level `{name}` is not solvable")));
            }
        }
        Ok(TestSuite { levels })
    }

    /// The eight built-in 9x9 mazes.
    pub fn standard() -> Self {
        let levels = [
            ("four-rooms", FOUR_ROOMS),
            ("labyrinth", LABYRINTH),
            ("spiral", SPIRAL),
            ("long-corridor", LONG_CORRIDOR),
            ("sixteen-rooms-scaled", SIXTEEN_ROOMS),
            ("dead-end-maze", DEAD_END_MAZE),
            ("perfect-maze", PERFECT_MAZE),
            ("open-field", OPEN_FIELD),
        ]
        .into_iter()
        .map(|(name, text)| (name.to_string(), parse_level(text).expect("built-in level parses")))
        .collect();
        TestSuite::new(levels).expect("built-in suite is valid")
    }

    /// Every level file in `dir`, named by file stem, in name order.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let levels = read_level_dir(dir)?
            .into_iter()
            .map(|(path, level)| {
                let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                (name, level)
            })
            .collect();
        TestSuite::new(levels)
    }

    /// `standard` or a level directory.
    pub fn resolve(spec: &str) -> Result<Self> {
        if spec == "standard" {
            Ok(TestSuite::standard())
        } else {
            TestSuite::from_dir(Path::new(spec))
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.levels.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&GridLevel> {
        self.levels.iter().find(|(n, _)| n == name).map(|(_, l)| l)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &GridLevel)> {
        self.levels.iter().map(|(n, l)| (n.as_str(), l))
    }
}

/// Parses every `.lvl` file in `dir`, sorted by path.
pub fn read_level_dir(dir: &Path) -> Result<Vec<(std::path::PathBuf, GridLevel)>> {
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == LEVEL_EXTENSION) {
            paths.push(path);
        }
    }
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            let level = parse_level(&text).map_err(|e| Error::InvalidLevel(format!("{}: {e}", p.display())))?;
            Ok((p, level))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_suite_is_valid() {
        let suite = TestSuite::standard();
        assert_eq!(suite.len(), 8);
        for (name, level) in suite.iter() {
            assert_eq!((level.width(), level.height()), (9, 9), "{name}");
            assert!(level.shortest_path_len().is_some(), "{name}");
        }
    }

    #[test]
    fn duplicate_names_rejected() {
        let l = TestSuite::standard().get("open-field").unwrap().clone();
        let r = TestSuite::new(vec![("a".into(), l.clone()), ("a".into(), l)]);
        assert!(r.is_err());
    }
}
