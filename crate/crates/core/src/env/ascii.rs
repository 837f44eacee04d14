//! Plain-text level format.
//!
//! ```text
//! dir: east
//! .....
//! .S.#.
//! ...G.
//! ```
//!
//! A `dir:` header line gives the start heading, then one line per row:
//! `#` wall, `.` empty, `S` start, `G` goal. Only the playable area is
//! written; the surrounding border is implicit.

use super::level::{GridLevel, Heading, Pos};
use crate::error::{Error, Result};

pub const LEVEL_EXTENSION: &str = "lvl";

pub fn serialize_level(level: &GridLevel) -> String {
    let mut out = String::with_capacity((level.width() + 1) * level.height() + 16);
    out.push_str("dir: ");
    out.push_str(level.start_dir().name());
    out.push('\n');
    for y in 0..level.height() {
        for x in 0..level.width() {
            let p = Pos::new(x, y);
            let c = if p == level.start() {
                'S'
            } else if p == level.goal() {
                'G'
            } else if level.is_wall(p) {
                '#'
            } else {
                '.'
            };
            out.push(c);
        }
        out.push('\n');
    }
    out
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

pub fn parse_level(text: &str) -> Result<GridLevel> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let (header_no, header) = lines.next().ok_or_else(|| err(1, 1, "empty level text"))?;
    let dir = match header.trim().strip_prefix("dir:") {
        Some(rest) => Heading::parse(rest)
            .ok_or_else(|| err(header_no, 6, format!("unknown heading `{}`", rest.trim())))?,
        None => return Err(err(header_no, 1, "expected `dir: <heading>` header")),
    };

    let mut width = None;
    let mut walls = Vec::new();
    let mut start = None;
    let mut goal = None;
    let mut height = 0;
    for (line_no, row) in lines {
        let chars: Vec<char> = row.chars().collect();
        match width {
            None => width = Some(chars.len()),
            Some(w) if w != chars.len() => {
                return Err(err(
                    line_no,
                    chars.len().min(w) + 1,
                    format!("ragged row: expected {w} cells, found {}", chars.len()),
                ))
            }
            _ => {}
        }
        for (x, &c) in chars.iter().enumerate() {
            let p = Pos::new(x, height);
            match c {
                '#' => walls.push(true),
                '.' => walls.push(false),
                'S' => {
                    if start.is_some() {
                        return Err(err(line_no, x + 1, "duplicate start 'S'"));
                    }
                    start = Some(p);
                    walls.push(false);
                }
                'G' => {
                    if goal.is_some() {
                        return Err(err(line_no, x + 1, "duplicate goal 'G'"));
                    }
                    goal = Some(p);
                    walls.push(false);
                }
                other => return Err(err(line_no, x + 1, format!("unknown glyph `{other}`"))),
            }
        }
        height += 1;
    }
    let width = width.ok_or_else(|| err(header_no + 1, 1, "level has no rows"))?;
    if width == 0 {
        return Err(err(header_no + 1, 1, "level has no columns"));
    }
    let start = start.ok_or_else(|| err(header_no, 1, "missing start 'S'"))?;
    let goal = goal.ok_or_else(|| err(header_no, 1, "missing goal 'G'"))?;
    GridLevel::from_mask(width, height, walls, start, dir, goal)
}

impl std::fmt::Display for GridLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&serialize_level(self))
    }
}

impl std::str::FromStr for GridLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_level(s)
    }
}
