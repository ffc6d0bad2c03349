//! Field of view, line of sight and the deterministic observation function.

use serde::{Deserialize, Serialize};

use crate::grid::{AgentPose, Cell, GridMap};

/// Shape of the observer's view rectangle in its local frame.
///
/// Rows `near..near + depth` ahead, `half_width` cells to each side. The
/// default is a 5x5 block whose first row is the observer's own row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FovConfig {
    pub depth: usize,
    pub half_width: usize,
    pub near: usize,
}

impl Default for FovConfig {
    fn default() -> Self {
        FovConfig { depth: 5, half_width: 2, near: 0 }
    }
}

/// What the observer receives each step. Headings are never revealed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observation {
    Detected(Cell),
    NotDetected,
}

impl Observation {
    pub fn is_detected(self) -> bool {
        matches!(self, Observation::Detected(_))
    }
}

/// Visible cells for one observer pose, as a sorted list plus a membership mask.
#[derive(Debug, Clone)]
pub struct FieldOfView {
    cells: Vec<Cell>,
    mask: Vec<bool>,
    width: usize,
}

impl FieldOfView {
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.col < self.width && self.mask.get(c.row * self.width + c.col).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Cells strictly between `from` and `to` on the Bresenham line.
pub fn line_between(from: Cell, to: Cell) -> Vec<Cell> {
    let (mut r, mut c) = (from.row as isize, from.col as isize);
    let (r1, c1) = (to.row as isize, to.col as isize);
    let dc = (c1 - c).abs();
    let dr = -(r1 - r).abs();
    let sc = if c < c1 { 1 } else { -1 };
    let sr = if r < r1 { 1 } else { -1 };
    let mut err = dc + dr;
    let mut out = Vec::new();
    loop {
        if r == r1 && c == c1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dr {
            err += dr;
            c += sc;
        }
        if e2 <= dc {
            err += dc;
            r += sr;
        }
        if r == r1 && c == c1 {
            break;
        }
        out.push(Cell::new(r as usize, c as usize));
    }
    out
}

/// True when no strictly intermediate cell on the line is an obstacle.
pub fn line_of_sight(map: &GridMap, from: Cell, to: Cell) -> bool {
    line_between(from, to).into_iter().all(|c| !map.is_obstacle(c))
}

/// Visible cells for `observer`, clipped to the grid and filtered by occlusion.
/// Obstacle cells are never visible.
pub fn field_of_view(map: &GridMap, observer: AgentPose, cfg: &FovConfig) -> FieldOfView {
    let (fr, fc) = observer.heading.delta();
    // right-hand lateral axis
    let (lr, lc) = (fc, -fr);
    let origin = observer.position;
    let hw = cfg.half_width as isize;
    let mut mask = vec![false; map.cell_count()];
    let mut cells = Vec::with_capacity(cfg.depth * (2 * cfg.half_width + 1));
    for k in cfg.near..cfg.near + cfg.depth {
        for l in -hw..=hw {
            let r = origin.row as isize + k as isize * fr + l * lr;
            let c = origin.col as isize + k as isize * fc + l * lc;
            if !map.in_bounds(r, c) {
                continue;
            }
            let cell = Cell::new(r as usize, c as usize);
            if map.is_obstacle(cell) || !line_of_sight(map, origin, cell) {
                continue;
            }
            mask[map.linear(cell)] = true;
            cells.push(cell);
        }
    }
    cells.sort();
    FieldOfView { cells, mask, width: map.width() }
}

/// Dirac observation: the actor's position if it is visible, else nothing.
pub fn observe(map: &GridMap, observer: AgentPose, actor: AgentPose, cfg: &FovConfig) -> Observation {
    observation_in(&field_of_view(map, observer, cfg), actor.position)
}

/// Observation for an actor at `actor_cell` given a precomputed view.
pub fn observation_in(fov: &FieldOfView, actor_cell: Cell) -> Observation {
    if fov.contains(actor_cell) {
        Observation::Detected(actor_cell)
    } else {
        Observation::NotDetected
    }
}
