//! Belief-space Monte Carlo tree search for the observer.
//!
//! Decision nodes hold an observer pose and an exact joint belief; chance
//! nodes hold the predicted belief for one action. Each simulation samples a
//! goal and actor pose from the prediction, derives the Dirac observation,
//! and descends into (or lazily creates) the matching decision node. New
//! nodes are valued from their own reward instead of a rollout; see
//! [`LeafValue`].

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DecisionContext, ObserverPolicy, PolicyDecision};
use crate::belief::{BeliefFilter, JointBelief};
use crate::error::{AgrError, Result};
use crate::grid::{step_pose, turn_aware_distance, Action, AgentPose};
use crate::sensor::{observation_in, FieldOfView, Observation};

/// How a freshly created node (and a node at the depth limit) is valued.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafValue {
    /// The node's own reward only.
    Immediate,
    /// The node's reward held constant until the depth limit, so returns
    /// from shallow and deep simulations cover the same horizon.
    #[default]
    Extrapolated,
}

/// Node reward used by the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardKind {
    /// Squared goal belief plus `entropy_weight * (1 - normalized pose entropy)`.
    #[default]
    Belief,
    /// Negative turn-aware distance to the most likely actor cell.
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub gamma: f64,
    pub ucb_c: f64,
    pub iterations: usize,
    pub max_depth: usize,
    pub entropy_weight: f64,
    pub rng_seed: u64,
    /// Epsilon of the actor model the observer filters with.
    pub epsilon: f64,
    pub reward: RewardKind,
    pub leaf_value: LeafValue,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            gamma: 0.95,
            ucb_c: std::f64::consts::SQRT_2,
            iterations: 100,
            max_depth: 10,
            entropy_weight: 0.5,
            rng_seed: 0,
            epsilon: 0.1,
            reward: RewardKind::Belief,
            leaf_value: LeafValue::default(),
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(AgrError::InvalidConfig(m.to_string()));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(self.ucb_c > 0.0) {
            return bad("ucb_c must be positive");
        }
        if self.iterations == 0 || self.max_depth == 0 {
            return bad("iterations and max_depth must be positive");
        }
        if !(self.entropy_weight >= 0.0) {
            return bad("entropy weight must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon must lie in [0, 1]");
        }
        Ok(())
    }

    /// Upper bound on any backed-up return under the belief reward.
    pub fn return_bound(&self) -> f64 {
        let r_max = 1.0 + self.entropy_weight;
        if self.gamma < 1.0 {
            r_max / (1.0 - self.gamma)
        } else {
            r_max * (self.max_depth + 1) as f64
        }
    }

    /// Value assigned to a leaf with reward `r` at `depth`.
    fn leaf_estimate(&self, r: f64, depth: usize) -> f64 {
        match self.leaf_value {
            LeafValue::Immediate => r,
            LeafValue::Extrapolated => {
                let steps = (self.max_depth.saturating_sub(depth) + 1) as i32;
                if self.gamma == 1.0 {
                    r * f64::from(steps)
                } else {
                    r * (1.0 - self.gamma.powi(steps)) / (1.0 - self.gamma)
                }
            }
        }
    }

    fn node_reward(&self, filter: &BeliefFilter, observer: AgentPose, belief: &JointBelief) -> f64 {
        match self.reward {
            RewardKind::Belief => belief.belief_reward() + self.entropy_weight * (1.0 - belief.actor_state_entropy()),
            RewardKind::Heuristic => {
                let target = most_likely_cell(filter, belief);
                -(turn_aware_distance(observer, target) as f64)
            }
        }
    }
}

fn most_likely_cell(filter: &BeliefFilter, belief: &JointBelief) -> crate::grid::Cell {
    let m = belief.cell_marginal(filter.map());
    let mut best = 0;
    for (i, &p) in m.iter().enumerate() {
        if p > m[best] {
            best = i;
        }
    }
    filter.map().cell_at(best)
}

#[derive(Debug)]
struct DecisionNode {
    observer: AgentPose,
    belief: JointBelief,
    reward: f64,
    depth: usize,
    visits: u32,
    value: f64,
    chance: [Option<ChanceNode>; 4],
}

#[derive(Debug)]
struct ChanceNode {
    visits: u32,
    value: f64,
    next_observer: AgentPose,
    fov: FieldOfView,
    predicted: JointBelief,
    /// Flat goal-major indices with non-zero predicted mass and their CDF.
    support: Vec<usize>,
    cdf: Vec<f64>,
    children: BTreeMap<(AgentPose, Observation), usize>,
}

impl ChanceNode {
    fn sample(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cdf.last().unwrap();
        let u = rng.gen::<f64>() * total;
        let k = self.cdf.partition_point(|&c| c <= u).min(self.support.len() - 1);
        self.support[k]
    }
}

/// One search tree rooted at the current belief and observer pose.
#[derive(Debug)]
pub struct SearchTree {
    cfg: PlannerConfig,
    nodes: Vec<DecisionNode>,
    depth_reached: usize,
}

impl SearchTree {
    pub fn new(filter: &BeliefFilter, belief: &JointBelief, observer: AgentPose, cfg: PlannerConfig) -> Result<Self> {
        cfg.validate()?;
        let reward = cfg.node_reward(filter, observer, belief);
        Ok(SearchTree {
            cfg,
            nodes: vec![DecisionNode {
                observer,
                belief: belief.clone(),
                reward,
                depth: 0,
                visits: 0,
                value: reward,
                chance: Default::default(),
            }],
            depth_reached: 0,
        })
    }

    /// Runs `cfg.iterations` simulations from the root.
    pub fn run(&mut self, filter: &BeliefFilter, rng: &mut impl Rng) -> Result<()> {
        for _ in 0..self.cfg.iterations {
            self.simulate(filter, 0, rng)?;
        }
        Ok(())
    }

    fn select(&self, idx: usize) -> usize {
        let node = &self.nodes[idx];
        if let Some(a) = (0..4).find(|&a| node.chance[a].as_ref().is_none_or(|c| c.visits == 0)) {
            return a;
        }
        let total: u32 = node.chance.iter().flatten().map(|c| c.visits).sum();
        let log_n = f64::from(total).ln();
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (a, c) in node.chance.iter().enumerate() {
            let c = c.as_ref().unwrap();
            let score = c.value + self.cfg.ucb_c * (log_n / f64::from(c.visits)).sqrt();
            if score > best_score {
                best = a;
                best_score = score;
            }
        }
        best
    }

    fn expand_chance(&self, filter: &BeliefFilter, idx: usize, action: usize) -> ChanceNode {
        let node = &self.nodes[idx];
        let next_observer = step_pose(filter.map(), node.observer, Action::from_index(action), true);
        let predicted = filter.predict(&node.belief);
        let mut support = Vec::new();
        let mut cdf = Vec::new();
        let mut acc = 0.0;
        for (k, &p) in predicted.as_slice().iter().enumerate() {
            if p > 0.0 {
                acc += p;
                support.push(k);
                cdf.push(acc);
            }
        }
        ChanceNode {
            visits: 0,
            value: 0.0,
            fov: filter.view(next_observer),
            next_observer,
            predicted,
            support,
            cdf,
            children: BTreeMap::new(),
        }
    }

    fn simulate(&mut self, filter: &BeliefFilter, idx: usize, rng: &mut impl Rng) -> Result<f64> {
        let depth = self.nodes[idx].depth;
        if depth >= self.cfg.max_depth {
            let node = &mut self.nodes[idx];
            node.visits += 1;
            return Ok(self.cfg.leaf_estimate(node.reward, depth));
        }
        let a = self.select(idx);
        if self.nodes[idx].chance[a].is_none() {
            let c = self.expand_chance(filter, idx, a);
            self.nodes[idx].chance[a] = Some(c);
        }
        let poses = self.nodes[idx].belief.pose_count();
        let (key, existing) = {
            let c = self.nodes[idx].chance[a].as_ref().unwrap();
            let k = c.sample(rng);
            let actor = filter.map().pose_at(k % poses);
            let key = (c.next_observer, observation_in(&c.fov, actor.position));
            (key, c.children.get(&key).copied())
        };
        let child_return = match existing {
            Some(child) => self.simulate(filter, child, rng)?,
            None => {
                let c = self.nodes[idx].chance[a].as_ref().unwrap();
                let belief = c.predicted.update_in_view(filter.map(), &c.fov, key.1, filter.config())?;
                let reward = self.cfg.node_reward(filter, key.0, &belief);
                let value = self.cfg.leaf_estimate(reward, depth + 1);
                let child = self.nodes.len();
                self.nodes.push(DecisionNode {
                    observer: key.0,
                    belief,
                    reward,
                    depth: depth + 1,
                    visits: 1,
                    value,
                    chance: Default::default(),
                });
                self.depth_reached = self.depth_reached.max(depth + 1);
                self.nodes[idx].chance[a].as_mut().unwrap().children.insert(key, child);
                value
            }
        };
        let node = &mut self.nodes[idx];
        let ret = node.reward + self.cfg.gamma * child_return;
        if self.cfg.reward == RewardKind::Belief {
            debug_assert!((0.0..=self.cfg.return_bound() + 1e-9).contains(&ret), "return {ret} outside bounds");
        }
        let c = node.chance[a].as_mut().unwrap();
        c.visits += 1;
        c.value += (ret - c.value) / f64::from(c.visits);
        node.visits += 1;
        node.value += (ret - node.value) / f64::from(node.visits);
        Ok(ret)
    }

    /// Root action with the most visits, lowest action index on ties.
    pub fn decision(&self) -> PolicyDecision {
        let root = &self.nodes[0];
        let visits: Vec<u32> = root.chance.iter().map(|c| c.as_ref().map_or(0, |c| c.visits)).collect();
        let q_estimates = root.chance.iter().map(|c| c.as_ref().filter(|c| c.visits > 0).map(|c| c.value)).collect();
        let mut best = 0;
        for a in 1..4 {
            if visits[a] > visits[best] {
                best = a;
            }
        }
        PolicyDecision { action: Action::from_index(best), q_estimates, visits, tree_depth_reached: self.depth_reached }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth_reached(&self) -> usize {
        self.depth_reached
    }

    pub fn root_value(&self) -> f64 {
        self.nodes[0].value
    }

    /// Checks the visit bookkeeping: a chance node's visits equal the
    /// arrivals at its children, and an interior decision node's visits equal
    /// its chance visits plus one for its own creation (none for the root).
    pub fn visit_counts_consistent(&self) -> bool {
        self.nodes.iter().enumerate().all(|(i, n)| {
            let chance_total: u32 = n.chance.iter().flatten().map(|c| c.visits).sum();
            let own = if i == 0 { 0 } else { 1 };
            let node_ok = n.depth >= self.cfg.max_depth || n.visits == chance_total + own;
            let chance_ok = n
                .chance
                .iter()
                .flatten()
                .all(|c| c.visits == c.children.values().map(|&k| self.nodes[k].visits).sum::<u32>());
            node_ok && chance_ok
        })
    }
}

/// Runs a fresh search seeded by `cfg.rng_seed` and returns the root decision.
pub fn mcts_select_action(
    belief: &JointBelief,
    observer: AgentPose,
    filter: &BeliefFilter,
    cfg: &PlannerConfig,
) -> Result<PolicyDecision> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut tree = SearchTree::new(filter, belief, observer, *cfg)?;
    tree.run(filter, &mut rng)?;
    Ok(tree.decision())
}

/// Episode-level MCTS policy; each step searches with a seed derived from
/// the base seed and the time step.
#[derive(Debug, Clone)]
pub struct AgrMcts {
    cfg: PlannerConfig,
}

impl AgrMcts {
    pub fn new(cfg: PlannerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(AgrMcts { cfg })
    }
}

impl ObserverPolicy for AgrMcts {
    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<PolicyDecision> {
        let cfg = PlannerConfig { rng_seed: crate::harness::derive_seed(self.cfg.rng_seed, ctx.t as u64), ..self.cfg };
        mcts_select_action(ctx.belief, ctx.observer, ctx.filter, &cfg)
    }
}
