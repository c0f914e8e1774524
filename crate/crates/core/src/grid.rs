//! Gridworld geometry: cells, walls, doors and the four-rooms layout.
//!
//! A [`GridSpec`] describes the static board. States of the induced game are
//! the *free* cells, indexed densely in row-major order; all distributions and
//! value tables elsewhere in the crate are laid out over that index space.

use std::collections::BTreeSet;
use std::collections::VecDeque;

use crate::error::{Error, Result};

/// A grid coordinate. `x` grows to the right, `y` grows downward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub fn new(x: usize, y: usize) -> Self {
        Cell { x, y }
    }

    /// Euclidean distance between cell centers.
    pub fn distance(&self, other: &Cell) -> f64 {
        let dx = self.x as f64 - other.x as f64;
        let dy = self.y as f64 - other.y as f64;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Static board description: dimensions, blocked cells, the designated
/// corridor cells of a four-rooms layout, start/target cells and the horizon.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub walls: BTreeSet<Cell>,
    pub doors: BTreeSet<Cell>,
    pub start: Cell,
    pub target: Option<Cell>,
    pub horizon: usize,
    /// Free cells in row-major order; the state space of the induced game.
    free_cells: Vec<Cell>,
    /// Row-major cell index -> free-cell state index (usize::MAX for walls).
    state_of_cell: Vec<usize>,
}

impl GridSpec {
    /// Builds a spec from explicit wall/door sets and validates it:
    /// start/target must be free, the free-cell graph under 4-connected moves
    /// must be connected, and the horizon must be at least 1.
    pub fn new(
        width: usize,
        height: usize,
        walls: BTreeSet<Cell>,
        doors: BTreeSet<Cell>,
        start: Cell,
        target: Option<Cell>,
        horizon: usize,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::config("grid dimensions must be positive"));
        }
        if horizon < 1 {
            return Err(Error::config("horizon must be at least 1"));
        }
        for c in walls.iter().chain(doors.iter()) {
            if c.x >= width || c.y >= height {
                return Err(Error::config(format!(
                    "cell ({}, {}) outside {}x{} grid",
                    c.x, c.y, width, height
                )));
            }
        }
        if walls.contains(&start) {
            return Err(Error::config("start cell is a wall"));
        }
        if let Some(t) = target {
            if walls.contains(&t) {
                return Err(Error::config("target cell is a wall"));
            }
        }

        let mut free_cells = Vec::new();
        let mut state_of_cell = vec![usize::MAX; width * height];
        for y in 0..height {
            for x in 0..width {
                let c = Cell::new(x, y);
                if !walls.contains(&c) {
                    state_of_cell[y * width + x] = free_cells.len();
                    free_cells.push(c);
                }
            }
        }
        if free_cells.is_empty() {
            return Err(Error::config("grid has no free cells"));
        }

        let spec = GridSpec {
            width,
            height,
            walls,
            doors,
            start,
            target,
            horizon,
            free_cells,
            state_of_cell,
        };
        if !spec.is_connected() {
            return Err(Error::config("free-cell graph is not connected"));
        }
        Ok(spec)
    }

    /// An open grid without interior walls; start top-left, target bottom-right.
    pub fn open(width: usize, height: usize, horizon: usize) -> Result<Self> {
        GridSpec::new(
            width,
            height,
            BTreeSet::new(),
            BTreeSet::new(),
            Cell::new(0, 0),
            Some(Cell::new(width - 1, height - 1)),
            horizon,
        )
    }

    /// Four rooms separated by a central wall cross, one door per wall
    /// segment. Start is the top-left free cell, target the bottom-right one.
    /// Requires odd dimensions of at least 5 so the cross bisects cleanly.
    pub fn four_rooms(width: usize, height: usize, horizon: usize) -> Result<Self> {
        if width < 5 || height < 5 {
            return Err(Error::config("four-rooms grid must be at least 5x5"));
        }
        if width % 2 == 0 || height % 2 == 0 {
            return Err(Error::config("four-rooms dimensions must be odd"));
        }
        let cx = width / 2;
        let cy = height / 2;
        // Door in the middle of each of the four wall segments.
        let doors = [
            Cell::new(cx, cy / 2),
            Cell::new(cx, cy + 1 + (height - cy - 1) / 2),
            Cell::new(cx / 2, cy),
            Cell::new(cx + 1 + (width - cx - 1) / 2, cy),
        ];
        let mut walls = BTreeSet::new();
        for y in 0..height {
            let c = Cell::new(cx, y);
            if !doors.contains(&c) {
                walls.insert(c);
            }
        }
        for x in 0..width {
            let c = Cell::new(x, cy);
            if !doors.contains(&c) {
                walls.insert(c);
            }
        }
        GridSpec::new(
            width,
            height,
            walls,
            doors.into_iter().collect(),
            Cell::new(0, 0),
            Some(Cell::new(width - 1, height - 1)),
            horizon,
        )
    }

    /// Parses an ASCII map: `#` wall, `.` free, `S` start, `T` target.
    /// Rows are lines; all rows must have equal length.
    pub fn from_ascii(map: &str, horizon: usize) -> Result<Self> {
        let rows: Vec<&str> = map
            .lines()
            .map(|l| l.trim_end_matches(['\r']))
            .filter(|l| !l.trim().is_empty())
            .collect();
        if rows.is_empty() {
            return Err(Error::config("empty map"));
        }
        let width = rows[0].chars().count();
        let height = rows.len();
        let mut walls = BTreeSet::new();
        let mut start = None;
        let mut target = None;
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::config(format!("map row {} has ragged width", y)));
            }
            for (x, ch) in row.chars().enumerate() {
                match ch {
                    '#' => {
                        walls.insert(Cell::new(x, y));
                    }
                    '.' => {}
                    'S' => {
                        if start.replace(Cell::new(x, y)).is_some() {
                            return Err(Error::config("map declares more than one start cell"));
                        }
                    }
                    'T' => {
                        if target.replace(Cell::new(x, y)).is_some() {
                            return Err(Error::config("map declares more than one target cell"));
                        }
                    }
                    other => {
                        return Err(Error::config(format!(
                            "unexpected map character {:?} at ({}, {})",
                            other, x, y
                        )));
                    }
                }
            }
        }
        let start = start.ok_or_else(|| Error::config("map has no start cell 'S'"))?;
        GridSpec::new(width, height, walls, BTreeSet::new(), start, target, horizon)
    }

    pub fn num_states(&self) -> usize {
        self.free_cells.len()
    }

    pub fn is_free(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height && !self.walls.contains(&c)
    }

    /// State index of a free cell.
    pub fn state_index(&self, c: Cell) -> Option<usize> {
        if c.x >= self.width || c.y >= self.height {
            return None;
        }
        let idx = self.state_of_cell[c.y * self.width + c.x];
        (idx != usize::MAX).then_some(idx)
    }

    pub fn cell_of_state(&self, state: usize) -> Cell {
        self.free_cells[state]
    }

    pub fn free_cells(&self) -> &[Cell] {
        &self.free_cells
    }

    pub fn start_state(&self) -> usize {
        self.state_index(self.start).expect("start is free")
    }

    pub fn target_state(&self) -> Option<usize> {
        self.target.and_then(|t| self.state_index(t))
    }

    /// Maximum possible distance between two cells; used to normalize the
    /// navigation distance penalty.
    pub fn diagonal(&self) -> f64 {
        let w = (self.width - 1) as f64;
        let h = (self.height - 1) as f64;
        (w * w + h * h).sqrt().max(1.0)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.free_cells.len()];
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(self.free_cells[0]);
        let mut visited = 1usize;
        while let Some(c) = queue.pop_front() {
            let mut push = |nc: Cell| {
                if let Some(idx) = self.state_index(nc) {
                    if !seen[idx] {
                        seen[idx] = true;
                        visited += 1;
                        queue.push_back(nc);
                    }
                }
            };
            if c.x > 0 {
                push(Cell::new(c.x - 1, c.y));
            }
            if c.y > 0 {
                push(Cell::new(c.x, c.y - 1));
            }
            push(Cell::new(c.x + 1, c.y));
            push(Cell::new(c.x, c.y + 1));
        }
        visited == self.free_cells.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_rooms_default_layout() {
        let g = GridSpec::four_rooms(13, 13, 40).unwrap();
        assert_eq!(g.horizon, 40);
        assert_eq!(g.doors.len(), 4);
        assert_eq!(g.start, Cell::new(0, 0));
        assert_eq!(g.target, Some(Cell::new(12, 12)));
        // Central cross minus four doors.
        assert_eq!(g.walls.len(), 13 + 13 - 1 - 4);
        assert!(g.is_free(Cell::new(0, 0)));
        assert!(!g.is_free(Cell::new(6, 6)));
    }

    #[test]
    fn four_rooms_minimum_size() {
        let g = GridSpec::four_rooms(5, 5, 1).unwrap();
        assert_eq!(g.num_states(), 25 - (5 + 5 - 1 - 4));
        assert!(g.state_index(Cell::new(0, 0)).is_some());
    }

    #[test]
    fn four_rooms_rejects_small_or_even() {
        assert!(GridSpec::four_rooms(3, 5, 10).is_err());
        assert!(GridSpec::four_rooms(6, 5, 10).is_err());
        assert!(GridSpec::four_rooms(5, 4, 10).is_err());
    }

    #[test]
    fn ascii_round_trip_of_structure() {
        let map = "S..#.\n...#.\n.....\n...#T\n";
        let g = GridSpec::from_ascii(map, 7).unwrap();
        assert_eq!(g.width, 5);
        assert_eq!(g.height, 4);
        assert_eq!(g.start, Cell::new(0, 0));
        assert_eq!(g.target, Some(Cell::new(4, 3)));
        assert_eq!(g.walls.len(), 3);
        assert_eq!(g.num_states(), 17);
    }

    #[test]
    fn ascii_rejects_disconnected_and_malformed() {
        // A full wall column disconnects the two sides.
        assert!(GridSpec::from_ascii("S.#..\n..#..\n..#..\n", 5).is_err());
        assert!(GridSpec::from_ascii("S..\n..\n", 5).is_err());
        assert!(GridSpec::from_ascii("...\n...\n", 5).is_err()); // no start
        assert!(GridSpec::from_ascii("S.x\n...\n", 5).is_err()); // bad char
    }

    #[test]
    fn state_indexing_is_row_major_over_free_cells() {
        let g = GridSpec::from_ascii("S#.\n...\n", 3).unwrap();
        assert_eq!(g.state_index(Cell::new(0, 0)), Some(0));
        assert_eq!(g.state_index(Cell::new(1, 0)), None);
        assert_eq!(g.state_index(Cell::new(2, 0)), Some(1));
        assert_eq!(g.state_index(Cell::new(0, 1)), Some(2));
        assert_eq!(g.cell_of_state(3), Cell::new(1, 1));
    }

    #[test]
    fn horizon_must_be_positive() {
        assert!(GridSpec::open(3, 3, 0).is_err());
    }
}
