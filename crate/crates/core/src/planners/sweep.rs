//! Search-and-Follow: a serpentine sweep until the actor is seen, then
//! pursuit of the last detected position.

use super::{move_toward, DecisionContext, ObserverPolicy, PolicyDecision};
use crate::error::Result;
use crate::grid::{turn_aware_distance, AgentPose, Cell, GridMap};
use crate::sensor::{FovConfig, Observation};

/// Column-major serpentine waypoints: one lane every view-width columns,
/// alternating top-to-bottom and bottom-to-top.
pub fn sweep_waypoints(map: &GridMap, fov: &FovConfig) -> Vec<Cell> {
    let span = 2 * fov.half_width + 1;
    let last_col = map.width() - 1;
    let mut lanes = Vec::new();
    let mut col = fov.half_width;
    while col + fov.half_width < last_col {
        lanes.push(col);
        col += span;
    }
    lanes.push(col.min(last_col.saturating_sub(fov.half_width)));
    let bottom = map.height() - 1;
    let mut points = Vec::with_capacity(lanes.len() * 2);
    for (i, col) in lanes.into_iter().enumerate() {
        let (a, b) = if i % 2 == 0 { (0, bottom) } else { (bottom, 0) };
        points.push(Cell::new(a, col));
        points.push(Cell::new(b, col));
    }
    points
}

#[derive(Debug, Clone)]
pub struct SearchAndFollow {
    waypoints: Vec<Cell>,
    next: Option<usize>,
    last_seen: Option<Cell>,
    /// Observations already scanned for detections.
    scanned: usize,
}

impl SearchAndFollow {
    pub fn new(map: &GridMap, fov: &FovConfig) -> Self {
        SearchAndFollow { waypoints: sweep_waypoints(map, fov), next: None, last_seen: None, scanned: 0 }
    }

    pub fn last_seen(&self) -> Option<Cell> {
        self.last_seen
    }

    fn sweep_target(&mut self, observer: AgentPose) -> Cell {
        let n = self.waypoints.len();
        let mut i = *self
            .next
            .get_or_insert_with(|| (0..n).min_by_key(|&i| turn_aware_distance(observer, self.waypoints[i])).unwrap());
        if self.waypoints[i] == observer.position {
            i = (i + 1) % n;
            self.next = Some(i);
        }
        self.waypoints[i]
    }
}

impl ObserverPolicy for SearchAndFollow {
    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<PolicyDecision> {
        let fresh = ctx.observations.get(self.scanned..).unwrap_or_default();
        if let Some(p) = fresh.iter().rev().find_map(|o| match o {
            Observation::Detected(p) => Some(*p),
            Observation::NotDetected => None,
        }) {
            self.last_seen = Some(p);
        }
        self.scanned = ctx.observations.len();
        let target = match self.last_seen {
            // once the last sighting is reached without a new one, resume sweeping from here
            Some(p) if p == ctx.observer.position && !ctx.observations.last().is_some_and(|o| o.is_detected()) => {
                self.last_seen = None;
                self.next = None;
                self.sweep_target(ctx.observer)
            }
            Some(p) => p,
            None => self.sweep_target(ctx.observer),
        };
        Ok(move_toward(ctx.filter.map(), ctx.observer, target))
    }
}
