use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A cell coordinate. `x` is the column, `y` the row; row 0 is the top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub x: usize,
    pub y: usize,
}

impl Pos {
    pub const fn new(x: usize, y: usize) -> Self {
        Pos { x, y }
    }

    /// Offset by `(dx, dy)`, or `None` when the result is outside `width x height`.
    pub fn offset(self, dx: isize, dy: isize, width: usize, height: usize) -> Option<Pos> {
        let x = self.x as isize + dx;
        let y = self.y as isize + dy;
        if x < 0 || y < 0 || x >= width as isize || y >= height as isize {
            None
        } else {
            Some(Pos::new(x as usize, y as usize))
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heading {
    North,
    East,
    South,
    West,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::North, Heading::East, Heading::South, Heading::West];

    pub fn index(self) -> usize {
        match self {
            Heading::North => 0,
            Heading::East => 1,
            Heading::South => 2,
            Heading::West => 3,
        }
    }

    pub fn from_index(i: usize) -> Heading {
        Heading::ALL[i % 4]
    }

    pub fn turn_right(self) -> Heading {
        Heading::from_index(self.index() + 1)
    }

    pub fn turn_left(self) -> Heading {
        Heading::from_index(self.index() + 3)
    }

    /// Unit step `(dx, dy)` in grid coordinates (y grows downward).
    pub fn delta(self) -> (isize, isize) {
        match self {
            Heading::North => (0, -1),
            Heading::East => (1, 0),
            Heading::South => (0, 1),
            Heading::West => (-1, 0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Heading::North => "north",
            Heading::East => "east",
            Heading::South => "south",
            Heading::West => "west",
        }
    }

    pub fn parse(s: &str) -> Option<Heading> {
        match s.trim().to_ascii_lowercase().as_str() {
            "north" | "n" => Some(Heading::North),
            "east" | "e" => Some(Heading::East),
            "south" | "s" => Some(Heading::South),
            "west" | "w" => Some(Heading::West),
            _ => None,
        }
    }
}

/// One environment parameterization: wall layout, start pose and goal cell.
///
/// `width x height` is the playable area. Everything outside it behaves as
/// wall, so the border is implicit and never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridLevel {
    width: usize,
    height: usize,
    walls: Vec<bool>,
    start: Pos,
    start_dir: Heading,
    goal: Pos,
}

impl GridLevel {
    /// Builds a level from an explicit wall list, checking every invariant.
    pub fn new(
        width: usize,
        height: usize,
        walls: impl IntoIterator<Item = Pos>,
        start: Pos,
        start_dir: Heading,
        goal: Pos,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidLevel(format!("empty grid {width}x{height}")));
        }
        let mut mask = vec![false; width * height];
        for w in walls {
            if w.x >= width || w.y >= height {
                return Err(Error::InvalidLevel(format!("wall {w} out of bounds")));
            }
            mask[w.y * width + w.x] = true;
        }
        Self::from_mask(width, height, mask, start, start_dir, goal)
    }

    pub fn from_mask(
        width: usize,
        height: usize,
        walls: Vec<bool>,
        start: Pos,
        start_dir: Heading,
        goal: Pos,
    ) -> Result<Self> {
        let level = GridLevel {
            width,
            height,
            walls,
            start,
            start_dir,
            goal,
        };
        level.validate()?;
        Ok(level)
    }

    /// An empty room of the given size.
    pub fn empty(width: usize, height: usize, start: Pos, start_dir: Heading, goal: Pos) -> Result<Self> {
        Self::from_mask(width, height, vec![false; width * height], start, start_dir, goal)
    }

    pub fn validate(&self) -> Result<()> {
        if self.walls.len() != self.width * self.height {
            return Err(Error::InvalidLevel("wall mask has the wrong length".into()));
        }
        if !self.in_bounds(self.start) {
            return Err(Error::InvalidLevel(format!("start {} out of bounds", self.start)));
        }
        if !self.in_bounds(self.goal) {
            return Err(Error::InvalidLevel(format!("goal {} out of bounds", self.goal)));
        }
        if self.start == self.goal {
            return Err(Error::InvalidLevel(format!("start and goal coincide at {}", self.start)));
        }
        if self.is_wall(self.start) {
            return Err(Error::InvalidLevel(format!("start {} is on a wall", self.start)));
        }
        if self.is_wall(self.goal) {
            return Err(Error::InvalidLevel(format!("goal {} is on a wall", self.goal)));
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn start(&self) -> Pos {
        self.start
    }

    pub fn start_dir(&self) -> Heading {
        self.start_dir
    }

    pub fn goal(&self) -> Pos {
        self.goal
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x < self.width && p.y < self.height
    }

    /// Out-of-bounds cells count as walls.
    pub fn is_wall(&self, p: Pos) -> bool {
        !self.in_bounds(p) || self.walls[p.y * self.width + p.x]
    }

    pub fn wall_count(&self) -> usize {
        self.walls.iter().filter(|&&w| w).count()
    }

    pub fn walls(&self) -> impl Iterator<Item = Pos> + '_ {
        self.walls
            .iter()
            .enumerate()
            .filter(|(_, &w)| w)
            .map(move |(i, _)| Pos::new(i % self.width, i / self.width))
    }

    pub fn cells(&self) -> impl Iterator<Item = Pos> {
        let (w, h) = (self.width, self.height);
        (0..h).flat_map(move |y| (0..w).map(move |x| Pos::new(x, y)))
    }

    /// Flips the wall bit of `p`. Fails on the start or goal cell.
    pub fn toggle_wall(&self, p: Pos) -> Result<GridLevel> {
        if !self.in_bounds(p) {
            return Err(Error::InvalidLevel(format!("cell {p} out of bounds")));
        }
        if p == self.start || p == self.goal {
            return Err(Error::InvalidLevel(format!("cannot place a wall on {p}")));
        }
        let mut next = self.clone();
        let i = p.y * self.width + p.x;
        next.walls[i] = !next.walls[i];
        Ok(next)
    }

    pub fn with_start(&self, start: Pos, start_dir: Heading) -> Result<GridLevel> {
        let mut next = self.clone();
        next.start = start;
        next.start_dir = start_dir;
        next.validate()?;
        Ok(next)
    }

    pub fn with_goal(&self, goal: Pos) -> Result<GridLevel> {
        let mut next = self.clone();
        next.goal = goal;
        next.validate()?;
        Ok(next)
    }

    /// Whether the goal can be reached from the start through 4-connected
    /// free cells.
    pub fn is_solvable(&self) -> bool {
        let mut seen = vec![false; self.width * self.height];
        let mut queue = VecDeque::new();
        seen[self.start.y * self.width + self.start.x] = true;
        queue.push_back(self.start);
        while let Some(p) = queue.pop_front() {
            if p == self.goal {
                return true;
            }
            for h in Heading::ALL {
                let (dx, dy) = h.delta();
                if let Some(n) = p.offset(dx, dy, self.width, self.height) {
                    let i = n.y * self.width + n.x;
                    if !seen[i] && !self.walls[i] {
                        seen[i] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        false
    }

    /// Length of the shortest 4-connected path from start to goal, if any.
    pub fn shortest_path_len(&self) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.width * self.height];
        let mut queue = VecDeque::new();
        dist[self.start.y * self.width + self.start.x] = 0;
        queue.push_back(self.start);
        while let Some(p) = queue.pop_front() {
            let d = dist[p.y * self.width + p.x];
            if p == self.goal {
                return Some(d);
            }
            for h in Heading::ALL {
                let (dx, dy) = h.delta();
                if let Some(n) = p.offset(dx, dy, self.width, self.height) {
                    let i = n.y * self.width + n.x;
                    if dist[i] == usize::MAX && !self.walls[i] {
                        dist[i] = d + 1;
                        queue.push_back(n);
                    }
                }
            }
        }
        None
    }
}

/// Free-function form of [`GridLevel::is_solvable`].
pub fn is_solvable(level: &GridLevel) -> bool {
    level.is_solvable()
}
