//! Grid geometry, agent poses and the shared four-action dynamics.
//!
//! Coordinates are `(row, col)` with row 0 at the top; North points toward
//! decreasing row, East toward increasing column.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{AgrError, Result};

/// A grid cell, serialized as `[row, col]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    /// Manhattan distance between two cells.
    pub fn manhattan(self, other: Cell) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }
}

impl From<(usize, usize)> for Cell {
    fn from((row, col): (usize, usize)) -> Self {
        Cell { row, col }
    }
}

impl From<Cell> for (usize, usize) {
    fn from(c: Cell) -> Self {
        (c.row, c.col)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Cardinal heading. The discriminant is the heading's slot in a pose index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "N")]
    North = 0,
    #[serde(rename = "E")]
    East = 1,
    #[serde(rename = "S")]
    South = 2,
    #[serde(rename = "W")]
    West = 3,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::North, Direction::East, Direction::South, Direction::West];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Direction {
        Self::ALL[i % 4]
    }

    pub fn turn_left(self) -> Direction {
        Self::from_index(self.index() + 3)
    }

    pub fn turn_right(self) -> Direction {
        Self::from_index(self.index() + 1)
    }

    pub fn reverse(self) -> Direction {
        Self::from_index(self.index() + 2)
    }

    /// Unit displacement `(d_row, d_col)`.
    pub fn delta(self) -> (isize, isize) {
        match self {
            Direction::North => (-1, 0),
            Direction::East => (0, 1),
            Direction::South => (1, 0),
            Direction::West => (0, -1),
        }
    }
}

/// Observer and actor action set; the order here is the tie-break order
/// used throughout the planners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Forward = 0,
    TurnLeft = 1,
    TurnRight = 2,
    Stay = 3,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Forward, Action::TurnLeft, Action::TurnRight, Action::Stay];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Action {
        Self::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Forward => "forward",
            Action::TurnLeft => "turn_left",
            Action::TurnRight => "turn_right",
            Action::Stay => "stay",
        }
    }
}

/// Position plus heading. Used for both the actor and the observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentPose {
    pub position: Cell,
    pub heading: Direction,
}

impl AgentPose {
    pub const fn new(position: Cell, heading: Direction) -> Self {
        AgentPose { position, heading }
    }
}

/// Static environment: dimensions and obstacle set.
///
/// Free cells are indexed in row-major order; that index, times four plus
/// the heading, is the actor pose index used by the belief matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    blocked: Vec<bool>,
    free_index: Vec<Option<usize>>,
    free_cells: Vec<Cell>,
}

#[derive(Serialize, Deserialize)]
struct GridMapDoc {
    width: usize,
    height: usize,
    obstacles: Vec<Cell>,
}

impl Serialize for GridMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridMapDoc { width: self.width, height: self.height, obstacles: self.obstacles() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = GridMapDoc::deserialize(d)?;
        GridMap::new(doc.width, doc.height, doc.obstacles).map_err(serde::de::Error::custom)
    }
}

impl GridMap {
    /// Builds a map; fails if an obstacle is out of bounds or no cell is free.
    pub fn new(width: usize, height: usize, obstacles: impl IntoIterator<Item = Cell>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(AgrError::InvalidMap("grid must have positive dimensions".into()));
        }
        let mut blocked = vec![false; width * height];
        for c in obstacles {
            if c.row >= height || c.col >= width {
                return Err(AgrError::InvalidMap(format!("obstacle {c} outside {width}x{height} grid")));
            }
            blocked[c.row * width + c.col] = true;
        }
        let mut free_index = vec![None; width * height];
        let mut free_cells = Vec::new();
        for row in 0..height {
            for col in 0..width {
                let i = row * width + col;
                if !blocked[i] {
                    free_index[i] = Some(free_cells.len());
                    free_cells.push(Cell::new(row, col));
                }
            }
        }
        if free_cells.is_empty() {
            return Err(AgrError::InvalidMap("grid has no free cells".into()));
        }
        Ok(GridMap { width, height, blocked, free_index, free_cells })
    }

    /// Obstacle-free map.
    pub fn open(width: usize, height: usize) -> Self {
        Self::new(width, height, std::iter::empty()).expect("positive dimensions")
    }

    /// Parses an ASCII layout where `#` marks an obstacle and anything else is free.
    pub fn from_ascii(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut obstacles = Vec::new();
        for (r, line) in rows.iter().enumerate() {
            if line.len() != width {
                return Err(AgrError::InvalidMap("ragged ascii layout".into()));
            }
            for (c, ch) in line.chars().enumerate() {
                if ch == '#' {
                    obstacles.push(Cell::new(r, c));
                }
            }
        }
        Self::new(width, height, obstacles)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    pub fn in_bounds(&self, row: isize, col: isize) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.row < self.height && c.col < self.width
    }

    /// Row-major linear index of an in-bounds cell.
    pub fn linear(&self, c: Cell) -> usize {
        c.row * self.width + c.col
    }

    pub fn cell_at(&self, linear: usize) -> Cell {
        Cell::new(linear / self.width, linear % self.width)
    }

    pub fn is_obstacle(&self, c: Cell) -> bool {
        self.contains(c) && self.blocked[self.linear(c)]
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.contains(c) && !self.blocked[self.linear(c)]
    }

    pub fn obstacles(&self) -> Vec<Cell> {
        (0..self.cell_count()).filter(|&i| self.blocked[i]).map(|i| self.cell_at(i)).collect()
    }

    pub fn free_cells(&self) -> &[Cell] {
        &self.free_cells
    }

    pub fn free_index(&self, c: Cell) -> Option<usize> {
        if self.contains(c) {
            self.free_index[self.linear(c)]
        } else {
            None
        }
    }

    /// Number of actor poses (free cells times four headings).
    pub fn pose_count(&self) -> usize {
        self.free_cells.len() * 4
    }

    /// Pose index of an actor pose, `None` when the position is not free.
    pub fn pose_index(&self, pose: AgentPose) -> Option<usize> {
        self.free_index(pose.position).map(|f| f * 4 + pose.heading.index())
    }

    pub fn pose_at(&self, index: usize) -> AgentPose {
        AgentPose::new(self.free_cells[index / 4], Direction::from_index(index % 4))
    }

    /// Neighbour in `dir`, if in bounds.
    pub fn neighbor(&self, c: Cell, dir: Direction) -> Option<Cell> {
        let (dr, dc) = dir.delta();
        let (r, col) = (c.row as isize + dr, c.col as isize + dc);
        self.in_bounds(r, col).then(|| Cell::new(r as usize, col as usize))
    }

    /// True when every free cell is reachable from every other via 4-neighbour moves.
    pub fn is_connected(&self) -> bool {
        let d = bfs_distances(self, self.free_cells[0]);
        self.free_cells.iter().all(|&c| d[self.linear(c)].is_some())
    }
}

/// Applies one action. Blocked or out-of-bounds Forward leaves the pose unchanged.
pub fn step_pose(map: &GridMap, pose: AgentPose, action: Action, traverses_obstacles: bool) -> AgentPose {
    match action {
        Action::Forward => match map.neighbor(pose.position, pose.heading) {
            Some(next) if traverses_obstacles || map.is_free(next) => AgentPose::new(next, pose.heading),
            _ => pose,
        },
        Action::TurnLeft => AgentPose::new(pose.position, pose.heading.turn_left()),
        Action::TurnRight => AgentPose::new(pose.position, pose.heading.turn_right()),
        Action::Stay => pose,
    }
}

/// Unit-step obstacle-aware BFS distances from `source` to every cell
/// (row-major). Obstacles and unreachable cells are `None`.
pub fn bfs_distances(map: &GridMap, source: Cell) -> Vec<Option<u32>> {
    let mut dist = vec![None; map.cell_count()];
    if !map.is_free(source) {
        return dist;
    }
    let mut queue = VecDeque::new();
    dist[map.linear(source)] = Some(0);
    queue.push_back(source);
    while let Some(c) = queue.pop_front() {
        let d = dist[map.linear(c)].unwrap();
        for dir in Direction::ALL {
            if let Some(n) = map.neighbor(c, dir) {
                let i = map.linear(n);
                if map.is_free(n) && dist[i].is_none() {
                    dist[i] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
    }
    dist
}

/// Minimum number of actions for a pose to reach `target` on an open grid
/// (obstacles ignored): Manhattan distance plus the turns required.
pub fn turn_aware_distance(pose: AgentPose, target: Cell) -> usize {
    let (fr, fc) = pose.heading.delta();
    let dr = target.row as isize - pose.position.row as isize;
    let dc = target.col as isize - pose.position.col as isize;
    let ahead = dr * fr + dc * fc;
    let lateral = dr * fc - dc * fr;
    let turns = if ahead < 0 {
        2
    } else if lateral != 0 {
        1
    } else {
        0
    };
    (dr.unsigned_abs() + dc.unsigned_abs()) + turns
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn turn_left_rotates_counter_clockwise() {
        let map = GridMap::open(5, 5);
        let p = AgentPose::new(Cell::new(2, 2), Direction::North);
        assert_eq!(step_pose(&map, p, Action::TurnLeft, false), AgentPose::new(Cell::new(2, 2), Direction::West));
    }

    #[test]
    fn forward_at_boundary_is_noop() {
        let map = GridMap::open(5, 5);
        let p = AgentPose::new(Cell::new(0, 0), Direction::North);
        assert_eq!(step_pose(&map, p, Action::Forward, false), p);
        assert_eq!(step_pose(&map, p, Action::Forward, true), p);
    }

    #[test]
    fn obstacle_traversal_flag() {
        let map = GridMap::new(6, 6, [Cell::new(3, 4)]).unwrap();
        let p = AgentPose::new(Cell::new(3, 3), Direction::East);
        assert_eq!(step_pose(&map, p, Action::Forward, false), p);
        assert_eq!(step_pose(&map, p, Action::Forward, true), AgentPose::new(Cell::new(3, 4), Direction::East));
    }

    #[test]
    fn stay_is_identity() {
        let map = GridMap::open(3, 3);
        let p = AgentPose::new(Cell::new(1, 1), Direction::South);
        assert_eq!(step_pose(&map, p, Action::Stay, false), p);
    }

    #[test]
    fn turns_are_inverse() {
        for d in Direction::ALL {
            assert_eq!(d.turn_left().turn_right(), d);
            assert_eq!(d.turn_right().turn_left(), d);
        }
    }

    #[test]
    fn rejects_out_of_bounds_obstacle() {
        assert!(GridMap::new(3, 3, [Cell::new(3, 0)]).is_err());
        assert!(GridMap::new(2, 1, [Cell::new(0, 0), Cell::new(0, 1)]).is_err());
    }

    #[test]
    fn pose_index_round_trip() {
        let map = GridMap::new(4, 3, [Cell::new(1, 1)]).unwrap();
        assert_eq!(map.pose_count(), 11 * 4);
        for i in 0..map.pose_count() {
            assert_eq!(map.pose_index(map.pose_at(i)), Some(i));
        }
        assert_eq!(map.pose_index(AgentPose::new(Cell::new(1, 1), Direction::North)), None);
    }

    #[test]
    fn json_round_trip() {
        let map = GridMap::new(4, 3, [Cell::new(1, 1), Cell::new(2, 3)]).unwrap();
        let text = serde_json::to_string(&map).unwrap();
        assert_eq!(text, r#"{"width":4,"height":3,"obstacles":[[1,1],[2,3]]}"#);
        let back: GridMap = serde_json::from_str(&text).unwrap();
        assert_eq!(back, map);
    }

    #[test]
    fn bfs_goes_around_walls() {
        let map = GridMap::from_ascii(&["...", ".#.", "..."]).unwrap();
        let d = bfs_distances(&map, Cell::new(0, 0));
        assert_eq!(d[map.linear(Cell::new(2, 2))], Some(4));
        assert_eq!(d[map.linear(Cell::new(1, 1))], None);
    }

    #[test]
    fn turn_aware_distance_cases() {
        let p = AgentPose::new(Cell::new(5, 5), Direction::North);
        assert_eq!(turn_aware_distance(p, Cell::new(5, 5)), 0);
        assert_eq!(turn_aware_distance(p, Cell::new(2, 5)), 3);
        assert_eq!(turn_aware_distance(p, Cell::new(2, 7)), 6);
        assert_eq!(turn_aware_distance(p, Cell::new(5, 7)), 3);
        assert_eq!(turn_aware_distance(p, Cell::new(7, 5)), 4);
        assert_eq!(turn_aware_distance(p, Cell::new(7, 3)), 6);
    }
}
