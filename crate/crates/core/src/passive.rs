//! Single-observation passive goal recognition, run incrementally.
//!
//! Each goal accumulates a cost difference between the actor's observed
//! progress and optimal progress toward that goal. Only detections carry
//! information; a missed observation leaves the state untouched.

use serde::{Deserialize, Serialize};

use crate::error::{AgrError, Result};
use crate::grid::{bfs_distances, Cell, GridMap};
use crate::sensor::Observation;

/// Posterior over goals from the passive recognizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PassivePosterior(pub Vec<f64>);

impl PassivePosterior {
    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, goal: usize) -> f64 {
        self.0[goal]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassiveState {
    goals: Vec<Cell>,
    beta: f64,
    width: usize,
    /// Unit-step optimal cost to each goal, row-major per goal.
    optc: Vec<Vec<Option<u32>>>,
    cdiff: Vec<f64>,
    last: Option<(Cell, usize)>,
}

impl PassiveState {
    /// Fresh recognizer with per-goal optimal-cost fields precomputed.
    /// Cells that cannot reach a goal get an infinite cost.
    pub fn new(map: &GridMap, goals: &[Cell], beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(AgrError::InvalidConfig(format!("beta {beta} must be a finite non-negative number")));
        }
        if goals.is_empty() {
            return Err(AgrError::EmptyGoalSet);
        }
        for (i, g) in goals.iter().enumerate() {
            if !map.is_free(*g) || goals[..i].contains(g) {
                return Err(AgrError::InvalidGoals(format!("goal {g} is not a distinct free cell")));
            }
        }
        Ok(PassiveState {
            goals: goals.to_vec(),
            beta,
            width: map.width(),
            optc: goals.iter().map(|&g| bfs_distances(map, g)).collect(),
            cdiff: vec![0.0; goals.len()],
            last: None,
        })
    }

    pub fn goals(&self) -> &[Cell] {
        &self.goals
    }

    pub fn cdiff(&self) -> &[f64] {
        &self.cdiff
    }

    pub fn last_detection(&self) -> Option<(Cell, usize)> {
        self.last
    }

    /// Optimal unit-step cost from `c` to goal `goal`; infinite when unreachable.
    pub fn optimal_cost(&self, goal: usize, c: Cell) -> f64 {
        self.optc[goal][c.row * self.width + c.col].map_or(f64::INFINITY, f64::from)
    }

    /// Folds in the observation made at time step `t`.
    pub fn update(&self, obs: Observation, t: usize) -> PassiveState {
        let mut next = self.clone();
        next.observe(obs, t);
        next
    }

    /// In-place form of [`PassiveState::update`].
    pub fn observe(&mut self, obs: Observation, t: usize) {
        let Observation::Detected(p) = obs else {
            return;
        };
        if let Some((prev, t_prev)) = self.last {
            debug_assert!(t > t_prev, "time steps must increase");
            let elapsed = t.saturating_sub(t_prev) as f64;
            for g in 0..self.goals.len() {
                let delta = self.optimal_cost(g, p) + elapsed - self.optimal_cost(g, prev);
                self.cdiff[g] += if delta.is_nan() { f64::INFINITY } else { delta };
            }
        }
        self.last = Some((p, t));
    }

    /// Sigmoid goal posterior `alpha * e^{-beta x} / (1 + e^{-beta x})` on
    /// the accumulated cost differences; uniform before the first detection.
    pub fn posterior(&self) -> PassivePosterior {
        let n = self.goals.len();
        if self.last.is_none() {
            return PassivePosterior(vec![1.0 / n as f64; n]);
        }
        // e^{-bx} / (1 + e^{-bx}) == 1 / (1 + e^{bx}); the second form stays finite
        let w: Vec<f64> = self
            .cdiff
            .iter()
            .map(|&x| {
                if x == f64::INFINITY {
                    0.0
                } else if self.beta == 0.0 {
                    0.5
                } else {
                    1.0 / (1.0 + (self.beta * x).exp())
                }
            })
            .collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            PassivePosterior(w.into_iter().map(|x| x / total).collect())
        } else {
            PassivePosterior(vec![1.0 / n as f64; n])
        }
    }
}
