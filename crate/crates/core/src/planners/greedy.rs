use super::{DecisionContext, ObserverPolicy, PolicyDecision};
use crate::belief::JointBelief;
use crate::error::Result;
use crate::grid::{step_pose, turn_aware_distance, Action, AgentPose, Cell, GridMap};

/// Action that most reduces the turn-aware, obstacle-ignoring distance from
/// the observer to `target`. Ties go to the earlier action in Forward,
/// TurnLeft, TurnRight, Stay. Diagnostics carry the negated distances as
/// q-estimates.
pub fn move_toward(map: &GridMap, observer: AgentPose, target: Cell) -> PolicyDecision {
    let dist = Action::ALL.map(|a| turn_aware_distance(step_pose(map, observer, a, true), target));
    let mut best = 0;
    for a in 1..4 {
        if dist[a] < dist[best] {
            best = a;
        }
    }
    PolicyDecision {
        action: Action::from_index(best),
        q_estimates: dist.iter().map(|&d| Some(-(d as f64))).collect(),
        visits: Vec::new(),
        tree_depth_reached: 0,
    }
}

/// Moves toward the most likely actor cell (row-major first on ties).
pub fn belief_greedy_action(belief: &JointBelief, observer: AgentPose, map: &GridMap) -> PolicyDecision {
    let m = belief.cell_marginal(map);
    let mut best = 0;
    for (i, &p) in m.iter().enumerate() {
        if p > m[best] {
            best = i;
        }
    }
    move_toward(map, observer, map.cell_at(best))
}

#[derive(Debug, Clone, Default)]
pub struct BeliefGreedy;

impl ObserverPolicy for BeliefGreedy {
    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<PolicyDecision> {
        Ok(belief_greedy_action(ctx.belief, ctx.observer, ctx.filter.map()))
    }
}
