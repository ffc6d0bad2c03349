//! The actor: private cost map, ground-truth path planning, and the
//! observer-side epsilon-greedy model of the actor's goal-directed policy.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AgrError, Result};
use crate::grid::{bfs_distances, step_pose, Action, AgentPose, Cell, Direction, GridMap};

/// Inclusive range of private traversal costs.
pub const COST_RANGE: (u32, u32) = (1, 5);

/// Cost charged by the actor's planner for a turn.
pub const TURN_COST: u64 = 1;

/// Private per-cell traversal cost, row-major; obstacle cells hold 0.
///
/// Serialized as a flat integer array.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostMap {
    costs: Vec<u32>,
}

impl CostMap {
    /// Validates a flat row-major array against `map`.
    pub fn from_flat(map: &GridMap, costs: Vec<u32>) -> Result<Self> {
        if costs.len() != map.cell_count() {
            return Err(AgrError::InvalidMap(format!(
                "cost map has {} entries, grid has {} cells",
                costs.len(),
                map.cell_count()
            )));
        }
        for (i, &c) in costs.iter().enumerate() {
            let cell = map.cell_at(i);
            if map.is_free(cell) && c == 0 {
                return Err(AgrError::InvalidMap(format!("free cell {cell} has zero cost")));
            }
        }
        Ok(CostMap { costs })
    }

    /// Same cost for every free cell.
    pub fn uniform(map: &GridMap, cost: u32) -> Self {
        let costs = (0..map.cell_count()).map(|i| if map.is_free(map.cell_at(i)) { cost.max(1) } else { 0 }).collect();
        CostMap { costs }
    }

    pub fn cost(&self, map: &GridMap, c: Cell) -> Option<u32> {
        map.is_free(c).then(|| self.costs[map.linear(c)])
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.costs
    }
}

/// Draws every free cell's cost uniformly from [`COST_RANGE`], row-major.
pub fn generate_cost_map(map: &GridMap, seed: u64) -> CostMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let costs = (0..map.cell_count())
        .map(|i| if map.is_free(map.cell_at(i)) { rng.gen_range(COST_RANGE.0..=COST_RANGE.1) } else { 0 })
        .collect();
    CostMap { costs }
}

/// The actor's scripted behaviour: a fixed cost-optimal action sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorPolicy {
    pub start: AgentPose,
    pub goal: Cell,
    pub actions: Vec<Action>,
    pub total_cost: u64,
}

impl ActorPolicy {
    /// Poses visited, starting with `start`; length is `actions.len() + 1`.
    pub fn trajectory(&self, map: &GridMap) -> Vec<AgentPose> {
        let mut poses = Vec::with_capacity(self.actions.len() + 1);
        let mut p = self.start;
        poses.push(p);
        for &a in &self.actions {
            p = step_pose(map, p, a, false);
            poses.push(p);
        }
        poses
    }
}

fn action_cost(map: &GridMap, costs: &CostMap, from: AgentPose, action: Action) -> Option<(AgentPose, u64)> {
    match action {
        Action::Forward => {
            let next = step_pose(map, from, action, false);
            (next != from).then(|| (next, u64::from(costs.cost(map, next.position).unwrap())))
        }
        Action::TurnLeft | Action::TurnRight => Some((step_pose(map, from, action, false), TURN_COST)),
        Action::Stay => None,
    }
}

/// Cost-to-go from every pose to any pose on `goal`, by reverse Dijkstra.
fn cost_to_go(map: &GridMap, costs: &CostMap, goal: Cell) -> Vec<u64> {
    let n = map.pose_count();
    let mut dist = vec![u64::MAX; n];
    let mut heap = BinaryHeap::new();
    for h in Direction::ALL {
        let i = map.pose_index(AgentPose::new(goal, h)).unwrap();
        dist[i] = 0;
        heap.push(Reverse((0u64, i)));
    }
    while let Some(Reverse((d, i))) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        let pose = map.pose_at(i);
        // predecessors: Forward from the cell behind, and both turns in place
        let mut preds: Vec<(AgentPose, u64)> = vec![
            (AgentPose::new(pose.position, pose.heading.turn_right()), TURN_COST),
            (AgentPose::new(pose.position, pose.heading.turn_left()), TURN_COST),
        ];
        if let Some(back) = map.neighbor(pose.position, pose.heading.reverse()) {
            if map.is_free(back) {
                let c = u64::from(costs.cost(map, pose.position).unwrap());
                preds.push((AgentPose::new(back, pose.heading), c));
            }
        }
        for (p, c) in preds {
            let j = map.pose_index(p).unwrap();
            let nd = d + c;
            if nd < dist[j] {
                dist[j] = nd;
                heap.push(Reverse((nd, j)));
            }
        }
    }
    dist
}

/// Cost-optimal action sequence from `start` to `goal` under the private
/// costs: entering a cell costs that cell's cost, turning costs
/// [`TURN_COST`]. Ties resolve in the order Forward, TurnLeft, TurnRight.
pub fn plan_actor_path(map: &GridMap, costs: &CostMap, start: AgentPose, goal: Cell) -> Result<ActorPolicy> {
    let unreachable = || AgrError::UnreachableGoal { from: start.position, goal };
    if !map.is_free(goal) {
        return Err(unreachable());
    }
    let start_idx = map.pose_index(start).ok_or_else(unreachable)?;
    let dist = cost_to_go(map, costs, goal);
    if dist[start_idx] == u64::MAX {
        return Err(unreachable());
    }
    let mut actions = Vec::new();
    let mut pose = start;
    while pose.position != goal {
        let here = dist[map.pose_index(pose).unwrap()];
        let (a, next) = [Action::Forward, Action::TurnLeft, Action::TurnRight]
            .into_iter()
            .find_map(|a| {
                let (next, c) = action_cost(map, costs, pose, a)?;
                let rest = dist[map.pose_index(next).unwrap()];
                (rest != u64::MAX && rest + c == here).then_some((a, next))
            })
            .expect("cost-to-go field is consistent");
        actions.push(a);
        pose = next;
    }
    Ok(ActorPolicy { start, goal, actions, total_cost: dist[start_idx] })
}

/// Total private cost of executing `actions` from `start`.
pub fn path_cost(map: &GridMap, costs: &CostMap, start: AgentPose, actions: &[Action]) -> Option<u64> {
    let mut pose = start;
    let mut total = 0;
    for &a in actions {
        let (next, c) = action_cost(map, costs, pose, a)?;
        total += c;
        pose = next;
    }
    Some(total)
}

/// Sparse row-stochastic matrix over actor poses (row = current pose).
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    probs: Vec<f64>,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Non-zero `(successor, probability)` entries of one row.
    pub fn row(&self, from: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.offsets[from]..self.offsets[from + 1];
        self.targets[span.clone()].iter().copied().zip(self.probs[span].iter().copied())
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.row(from).find(|&(t, _)| t == to).map_or(0.0, |(_, p)| p)
    }

    /// Identity transitions; mostly useful in tests.
    pub fn identity(n: usize) -> Self {
        TransitionMatrix { offsets: (0..=n).collect(), targets: (0..n).collect(), probs: vec![1.0; n] }
    }

    /// Builds a matrix from dense rows, dropping zeros.
    pub fn from_rows(rows: &[Vec<(usize, f64)>]) -> Self {
        let mut offsets = vec![0];
        let mut targets = Vec::new();
        let mut probs = Vec::new();
        for row in rows {
            for &(t, p) in row {
                if p != 0.0 {
                    targets.push(t);
                    probs.push(p);
                }
            }
            offsets.push(targets.len());
        }
        TransitionMatrix { offsets, targets, probs }
    }
}

/// Spreads `1 - epsilon` uniformly over the minimum-score actions and
/// `epsilon / 4` over all four.
pub fn epsilon_greedy(score: [u32; 4], epsilon: f64) -> [f64; 4] {
    let best = *score.iter().min().unwrap();
    let n_best = score.iter().filter(|&&d| d == best).count() as f64;
    let base = epsilon / 4.0;
    score.map(|d| if d == best { (1.0 - epsilon) / n_best + base } else { base })
}

/// Observer-side epsilon-greedy model of the actor, one unit-step distance
/// field per candidate goal.
#[derive(Debug, Clone)]
pub struct ActorModel {
    epsilon: f64,
    goals: Vec<Cell>,
    fields: Vec<Vec<Option<u32>>>,
}

impl ActorModel {
    pub fn new(map: &GridMap, goals: &[Cell], epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(AgrError::InvalidConfig(format!("epsilon {epsilon} outside [0, 1]")));
        }
        if let Some(g) = goals.iter().find(|g| !map.is_free(**g)) {
            return Err(AgrError::InvalidGoals(format!("goal {g} is not a free cell")));
        }
        let fields = goals.iter().map(|&g| bfs_distances(map, g)).collect();
        Ok(ActorModel { epsilon, goals: goals.to_vec(), fields })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn goals(&self) -> &[Cell] {
        &self.goals
    }

    /// Unit-step distance from `c` to goal `goal_idx`; `None` if unreachable.
    pub fn distance(&self, map: &GridMap, goal_idx: usize, c: Cell) -> Option<u32> {
        self.fields[goal_idx][map.linear(c)]
    }

    /// Action probabilities (indexed by [`Action::index`]) for an actor at
    /// `pose` heading to goal `goal_idx`.
    ///
    /// Each action is scored by the distance of the cell it leads to; the
    /// minimisers share `1 - epsilon` uniformly and every action gets
    /// `epsilon / 4` on top.
    pub fn action_distribution(&self, map: &GridMap, pose: AgentPose, goal_idx: usize) -> [f64; 4] {
        let field = &self.fields[goal_idx];
        let score = Action::ALL.map(|a| {
            let next = step_pose(map, pose, a, false);
            field[map.linear(next.position)].unwrap_or(u32::MAX)
        });
        epsilon_greedy(score, self.epsilon)
    }

    /// Goal-conditioned pose transition matrix obtained by pushing the
    /// action distribution through the deterministic dynamics.
    pub fn transition_matrix(&self, map: &GridMap, goal_idx: usize) -> TransitionMatrix {
        let n = map.pose_count();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(n * 4);
        let mut probs = Vec::with_capacity(n * 4);
        offsets.push(0);
        for i in 0..n {
            let pose = map.pose_at(i);
            let dist = self.action_distribution(map, pose, goal_idx);
            let start = targets.len();
            for a in Action::ALL {
                let j = map.pose_index(step_pose(map, pose, a, false)).unwrap();
                match targets[start..].iter().position(|&t| t == j) {
                    Some(k) => probs[start + k] += dist[a.index()],
                    None => {
                        targets.push(j);
                        probs.push(dist[a.index()]);
                    }
                }
            }
            offsets.push(targets.len());
        }
        TransitionMatrix { offsets, targets, probs }
    }

    /// One transition matrix per candidate goal.
    pub fn transition_matrices(&self, map: &GridMap) -> Vec<TransitionMatrix> {
        (0..self.goals.len()).map(|g| self.transition_matrix(map, g)).collect()
    }
}
