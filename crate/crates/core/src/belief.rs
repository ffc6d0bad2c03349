//! Joint belief over (actor pose, goal): prediction through the
//! goal-conditioned actor model, Bayes conditioning on Dirac observations,
//! goal marginals and the belief-based rewards.
//!
//! The matrix is stored goal-major: column `g` is the contiguous slice
//! `data[g * poses .. (g + 1) * poses]`, so prediction works one goal column
//! at a time and never mixes goals.

use serde::{Deserialize, Serialize};

use crate::actor::{ActorModel, TransitionMatrix};
use crate::error::{AgrError, Result};
use crate::grid::{bfs_distances, AgentPose, Cell, GridMap};
use crate::sensor::{field_of_view, FieldOfView, FovConfig, Observation};

/// What to do when an observation has zero probability under the prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegeneratePolicy {
    /// Keep the predicted goal marginal, spread each goal's mass uniformly
    /// over the poses consistent with the observation.
    #[default]
    KeepGoalMarginal,
    /// Restart from the uniform prior, conditioned on the observation.
    Reinitialize,
    /// Report [`AgrError::DegenerateObservation`].
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefConfig {
    /// Normalizers at or below this value count as degenerate. In `[0, 1e-6]`.
    pub floor: f64,
    pub on_degenerate: DegeneratePolicy,
}

impl Default for BeliefConfig {
    fn default() -> Self {
        BeliefConfig { floor: 0.0, on_degenerate: DegeneratePolicy::default() }
    }
}

impl BeliefConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1e-6).contains(&self.floor) {
            return Err(AgrError::InvalidConfig(format!("belief floor {} outside [0, 1e-6]", self.floor)));
        }
        Ok(())
    }
}

/// Per-goal posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GoalMarginal(pub Vec<f64>);

impl GoalMarginal {
    pub fn uniform(n: usize) -> Self {
        GoalMarginal(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, goal: usize) -> f64 {
        self.0[goal]
    }

    /// Sum of squared goal probabilities.
    pub fn squared_sum(&self) -> f64 {
        self.0.iter().map(|p| p * p).sum()
    }

    /// Index of the most probable goal, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }
}

/// Joint probability over (actor pose index, goal index).
#[derive(Debug, Clone, PartialEq)]
pub struct JointBelief {
    poses: usize,
    goals: usize,
    data: Vec<f64>,
}

impl JointBelief {
    /// Initial belief: uniform over poses that can reach each goal, with
    /// goal columns scaled by `prior` (uniform when `None`).
    pub fn init(map: &GridMap, goals: &[Cell], prior: Option<&[f64]>) -> Result<Self> {
        validate_goals(map, goals)?;
        let n_goals = goals.len();
        let prior = match prior {
            Some(p) => {
                let total: f64 = p.iter().sum();
                if p.len() != n_goals || p.iter().any(|&x| x < 0.0) || (total - 1.0).abs() > 1e-9 {
                    return Err(AgrError::InvalidConfig("goal prior must be a distribution over the goals".into()));
                }
                p.to_vec()
            }
            None => vec![1.0 / n_goals as f64; n_goals],
        };
        let poses = map.pose_count();
        let mut data = vec![0.0; poses * n_goals];
        for (g, &goal) in goals.iter().enumerate() {
            let field = bfs_distances(map, goal);
            let reach: Vec<usize> =
                (0..poses).filter(|&s| field[map.linear(map.pose_at(s).position)].is_some()).collect();
            let w = prior[g] / reach.len() as f64;
            for s in reach {
                data[g * poses + s] = w;
            }
        }
        Ok(JointBelief { poses, goals: n_goals, data })
    }

    /// Builds a belief from a goal-major matrix, normalizing it.
    pub fn from_columns(poses: usize, goals: usize, mut data: Vec<f64>) -> Result<Self> {
        if data.len() != poses * goals || data.iter().any(|&x| !(x >= 0.0)) {
            return Err(AgrError::InvalidConfig("belief matrix shape or entries invalid".into()));
        }
        let total: f64 = data.iter().sum();
        if total <= 0.0 {
            return Err(AgrError::InvalidConfig("belief matrix has no mass".into()));
        }
        data.iter_mut().for_each(|x| *x /= total);
        Ok(JointBelief { poses, goals, data })
    }

    /// All mass on one pose, split across goals by `goal_probs`.
    pub fn point_mass(map: &GridMap, pose: AgentPose, goal_probs: &[f64]) -> Result<Self> {
        let poses = map.pose_count();
        let s = map
            .pose_index(pose)
            .ok_or_else(|| AgrError::InvalidConfig(format!("pose at {} is not free", pose.position)))?;
        let mut data = vec![0.0; poses * goal_probs.len()];
        for (g, &p) in goal_probs.iter().enumerate() {
            data[g * poses + s] = p;
        }
        Self::from_columns(poses, goal_probs.len(), data)
    }

    pub fn pose_count(&self) -> usize {
        self.poses
    }

    pub fn goal_count(&self) -> usize {
        self.goals
    }

    pub fn get(&self, pose: usize, goal: usize) -> f64 {
        self.data[goal * self.poses + pose]
    }

    pub fn column(&self, goal: usize) -> &[f64] {
        &self.data[goal * self.poses..(goal + 1) * self.poses]
    }

    /// Goal-major raw entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn total_mass(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Pushes every goal column through that goal's transition matrix.
    pub fn predict(&self, transitions: &[TransitionMatrix]) -> JointBelief {
        assert_eq!(transitions.len(), self.goals, "one transition matrix per goal");
        let mut out = vec![0.0; self.data.len()];
        for (g, t) in transitions.iter().enumerate() {
            debug_assert_eq!(t.size(), self.poses);
            let src = self.column(g);
            let dst = &mut out[g * self.poses..(g + 1) * self.poses];
            for (s, &m) in src.iter().enumerate() {
                if m == 0.0 {
                    continue;
                }
                for (next, p) in t.row(s) {
                    dst[next] += m * p;
                }
            }
        }
        JointBelief { poses: self.poses, goals: self.goals, data: out }
    }

    /// Bayes update of a predicted belief on observation `obs` made from `observer`.
    pub fn update(
        &self,
        map: &GridMap,
        observer: AgentPose,
        obs: Observation,
        fov_cfg: &FovConfig,
        cfg: &BeliefConfig,
    ) -> Result<JointBelief> {
        self.update_in_view(map, &field_of_view(map, observer, fov_cfg), obs, cfg)
    }

    /// [`JointBelief::update`] with a precomputed field of view.
    pub fn update_in_view(
        &self,
        map: &GridMap,
        fov: &FieldOfView,
        obs: Observation,
        cfg: &BeliefConfig,
    ) -> Result<JointBelief> {
        let mut data = self.data.clone();
        apply_likelihood(&mut data, self.poses, map, fov, obs);
        let total: f64 = data.iter().sum();
        if total > cfg.floor {
            data.iter_mut().for_each(|x| *x /= total);
            return Ok(JointBelief { poses: self.poses, goals: self.goals, data });
        }
        let goal_mass = match cfg.on_degenerate {
            DegeneratePolicy::Fail => return Err(AgrError::DegenerateObservation(total)),
            DegeneratePolicy::KeepGoalMarginal => self.goal_marginal().0,
            DegeneratePolicy::Reinitialize => vec![1.0 / self.goals as f64; self.goals],
        };
        let mut consistent = vec![1.0; self.poses];
        apply_likelihood(&mut consistent, self.poses, map, fov, obs);
        let n: f64 = consistent.iter().sum();
        if n == 0.0 {
            return Err(AgrError::DegenerateObservation(total));
        }
        let mut data = vec![0.0; self.data.len()];
        for (g, &m) in goal_mass.iter().enumerate() {
            for (s, &c) in consistent.iter().enumerate() {
                data[g * self.poses + s] = m * c / n;
            }
        }
        Ok(JointBelief { poses: self.poses, goals: self.goals, data })
    }

    /// Column sums.
    pub fn goal_marginal(&self) -> GoalMarginal {
        GoalMarginal((0..self.goals).map(|g| self.column(g).iter().sum()).collect())
    }

    /// Row sums: marginal over actor poses.
    pub fn pose_marginal(&self) -> Vec<f64> {
        let mut m = self.column(0).to_vec();
        for g in 1..self.goals {
            for (acc, x) in m.iter_mut().zip(self.column(g)) {
                *acc += x;
            }
        }
        m
    }

    /// Marginal over cells (row-major over all grid cells), headings summed.
    pub fn cell_marginal(&self, map: &GridMap) -> Vec<f64> {
        let mut m = vec![0.0; map.cell_count()];
        for (s, p) in self.pose_marginal().into_iter().enumerate() {
            m[map.linear(map.pose_at(s).position)] += p;
        }
        m
    }

    /// Squared-belief reward: sum over goals of the squared goal marginal.
    pub fn belief_reward(&self) -> f64 {
        self.goal_marginal().squared_sum()
    }

    /// Shannon entropy of the pose marginal divided by `ln(pose count)`.
    pub fn actor_state_entropy(&self) -> f64 {
        let h: f64 = self.pose_marginal().iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum();
        (h / (self.poses as f64).ln()).clamp(0.0, 1.0)
    }

    /// Distribution of the next observation made from `next_observer`, after
    /// one prediction step. Lists every visible cell plus `NotDetected`.
    pub fn observation_likelihood(
        &self,
        transitions: &[TransitionMatrix],
        map: &GridMap,
        next_observer: AgentPose,
        fov_cfg: &FovConfig,
    ) -> Vec<(Observation, f64)> {
        let predicted = self.predict(transitions);
        predicted.observation_distribution(map, &field_of_view(map, next_observer, fov_cfg))
    }

    /// Observation distribution for this (already predicted) belief.
    pub fn observation_distribution(&self, map: &GridMap, fov: &FieldOfView) -> Vec<(Observation, f64)> {
        let marginal = self.pose_marginal();
        let mut out = Vec::with_capacity(fov.len() + 1);
        let mut unseen = 0.0;
        for (s, &p) in marginal.iter().enumerate() {
            if !fov.contains(map.pose_at(s).position) {
                unseen += p;
            }
        }
        for &c in fov.cells() {
            let base = map.free_index(c).expect("visible cells are free") * 4;
            let p: f64 = marginal[base..base + 4].iter().sum();
            out.push((Observation::Detected(c), p));
        }
        out.push((Observation::NotDetected, unseen));
        out
    }

    /// Trace fragment: goal marginal, plus the raw matrix when `full`.
    pub fn trace(&self, full: bool) -> BeliefTrace {
        BeliefTrace { goal_marginal: self.goal_marginal(), matrix: full.then(|| self.data.clone()) }
    }
}

fn apply_likelihood(data: &mut [f64], poses: usize, map: &GridMap, fov: &FieldOfView, obs: Observation) {
    let goals = data.len() / poses;
    match obs {
        Observation::Detected(p) => {
            let keep = map.free_index(p).filter(|_| fov.contains(p)).map(|f| f * 4);
            for g in 0..goals {
                let col = &mut data[g * poses..(g + 1) * poses];
                for (s, x) in col.iter_mut().enumerate() {
                    if keep.is_none_or(|k| s < k || s >= k + 4) {
                        *x = 0.0;
                    }
                }
            }
        }
        Observation::NotDetected => {
            for &c in fov.cells() {
                let base = map.free_index(c).expect("visible cells are free") * 4;
                for g in 0..goals {
                    data[g * poses + base..g * poses + base + 4].fill(0.0);
                }
            }
        }
    }
}

fn validate_goals(map: &GridMap, goals: &[Cell]) -> Result<()> {
    if goals.len() < 2 {
        return Err(AgrError::EmptyGoalSet);
    }
    for (i, g) in goals.iter().enumerate() {
        if !map.is_free(*g) {
            return Err(AgrError::InvalidGoals(format!("goal {g} is not a free cell")));
        }
        if goals[..i].contains(g) {
            return Err(AgrError::InvalidGoals(format!("goal {g} listed twice")));
        }
    }
    Ok(())
}

/// Serialized belief snapshot for traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefTrace {
    pub goal_marginal: GoalMarginal,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub matrix: Option<Vec<f64>>,
}

/// Everything the observer needs to filter and simulate: the map, the
/// candidate goals, per-goal transition matrices and sensor settings.
#[derive(Debug, Clone)]
pub struct BeliefFilter {
    map: GridMap,
    goals: Vec<Cell>,
    transitions: Vec<TransitionMatrix>,
    fov: FovConfig,
    cfg: BeliefConfig,
}

impl BeliefFilter {
    pub fn new(map: &GridMap, goals: &[Cell], epsilon: f64, fov: FovConfig, cfg: BeliefConfig) -> Result<Self> {
        cfg.validate()?;
        let model = ActorModel::new(map, goals, epsilon)?;
        Ok(BeliefFilter {
            map: map.clone(),
            goals: goals.to_vec(),
            transitions: model.transition_matrices(map),
            fov,
            cfg,
        })
    }

    /// Filter with explicit transition matrices (one per goal).
    pub fn with_transitions(
        map: &GridMap,
        goals: &[Cell],
        transitions: Vec<TransitionMatrix>,
        fov: FovConfig,
        cfg: BeliefConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if transitions.len() != goals.len() {
            return Err(AgrError::InvalidConfig("one transition matrix per goal".into()));
        }
        Ok(BeliefFilter { map: map.clone(), goals: goals.to_vec(), transitions, fov, cfg })
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn goals(&self) -> &[Cell] {
        &self.goals
    }

    pub fn transitions(&self) -> &[TransitionMatrix] {
        &self.transitions
    }

    pub fn fov_config(&self) -> &FovConfig {
        &self.fov
    }

    pub fn config(&self) -> &BeliefConfig {
        &self.cfg
    }

    pub fn view(&self, observer: AgentPose) -> FieldOfView {
        field_of_view(&self.map, observer, &self.fov)
    }

    pub fn initial(&self, prior: Option<&[f64]>) -> Result<JointBelief> {
        JointBelief::init(&self.map, &self.goals, prior)
    }

    pub fn predict(&self, j: &JointBelief) -> JointBelief {
        j.predict(&self.transitions)
    }

    pub fn update(&self, predicted: &JointBelief, observer: AgentPose, obs: Observation) -> Result<JointBelief> {
        predicted.update(&self.map, observer, obs, &self.fov, &self.cfg)
    }

    /// Full recursion: predict, then condition on `obs` seen from `observer`.
    pub fn step(&self, j: &JointBelief, observer: AgentPose, obs: Observation) -> Result<JointBelief> {
        self.update(&self.predict(j), observer, obs)
    }

    pub fn observation_likelihood(&self, j: &JointBelief, next_observer: AgentPose) -> Vec<(Observation, f64)> {
        j.observation_likelihood(&self.transitions, &self.map, next_observer, &self.fov)
    }
}
