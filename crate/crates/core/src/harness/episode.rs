//! Episode orchestration: the scripted actor, the observer's policy, and
//! both inference pipelines fed from one observation stream.

use serde::{Deserialize, Serialize};

use super::derive_seed;
use super::instance::InstanceSpec;
use super::metrics::{convergence, success_and_final, MetricsConfig};
use crate::belief::{BeliefConfig, BeliefFilter, GoalMarginal};
use crate::error::{AgrError, Result};
use crate::grid::{step_pose, Action, AgentPose};
use crate::passive::{PassivePosterior, PassiveState};
use crate::planners::{
    AgrMcts, Algorithm, BeliefGreedy, DecisionContext, ObserverPolicy, PassiveRandom, PlannerConfig, PolicyDecision,
    SearchAndFollow,
};
use crate::sensor::{observe, FovConfig, Observation};

/// Everything that parameterizes an episode besides the instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub planner: PlannerConfig,
    /// Passive recognizer scaling.
    pub beta: f64,
    pub fov: FovConfig,
    pub belief: BeliefConfig,
    pub metrics: MetricsConfig,
    /// Keep the full joint matrix in every step record.
    pub full_belief_trace: bool,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            planner: PlannerConfig::default(),
            beta: 1.0,
            fov: FovConfig::default(),
            belief: BeliefConfig::default(),
            metrics: MetricsConfig::default(),
            full_belief_trace: false,
        }
    }
}

/// Which goal posterior a metric reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inference {
    Joint,
    Passive,
}

/// One line of a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub actor: AgentPose,
    pub observer: AgentPose,
    pub observation: Observation,
    pub goal_marginal: GoalMarginal,
    pub passive_posterior: PassivePosterior,
    /// Observer action taken after this step's observation; absent at `T`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub decision: Option<PolicyDecision>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub belief_matrix: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub algorithm: Algorithm,
    pub true_goal: usize,
    pub steps: Vec<StepRecord>,
    /// True when the actor reached its goal before the step cap.
    pub reached_goal: bool,
}

impl EpisodeRecord {
    /// Terminal time `T` (actor steps taken).
    pub fn terminal_time(&self) -> usize {
        self.steps.len() - 1
    }

    /// `b_t(g*)` for `t = 0..=T` from the chosen pipeline.
    pub fn true_goal_series(&self, inference: Inference) -> Vec<f64> {
        self.steps
            .iter()
            .map(|s| match inference {
                Inference::Joint => s.goal_marginal.get(self.true_goal),
                Inference::Passive => s.passive_posterior.get(self.true_goal),
            })
            .collect()
    }

    /// Pipeline the algorithm itself reports through.
    pub fn native_inference(&self) -> Inference {
        if self.algorithm.uses_joint_belief() {
            Inference::Joint
        } else {
            Inference::Passive
        }
    }

    pub fn observations(&self) -> Vec<Observation> {
        self.steps.iter().map(|s| s.observation).collect()
    }

    pub fn metrics(&self, inference: Inference, theta: f64) -> EpisodeMetrics {
        let series = self.true_goal_series(inference);
        let (success, final_prob) = success_and_final(&series, theta);
        EpisodeMetrics { cv: convergence(&series, theta), success, final_prob, terminal_time: self.terminal_time() }
    }

    /// Mean MCTS tree depth over the recorded decisions (0 without a tree).
    pub fn mean_tree_depth(&self) -> f64 {
        let depths: Vec<usize> =
            self.steps.iter().filter_map(|s| s.decision.as_ref().map(|d| d.tree_depth_reached)).collect();
        if depths.is_empty() {
            0.0
        } else {
            depths.iter().sum::<usize>() as f64 / depths.len() as f64
        }
    }

    /// JSON-lines trace, one step per line.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&serde_json::to_string(s)?);
            out.push('\n');
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub cv: f64,
    pub success: bool,
    pub final_prob: f64,
    pub terminal_time: usize,
}

/// Default step cap `4 * (width + height)`.
pub fn default_step_cap(spec: &InstanceSpec) -> usize {
    4 * (spec.grid.width() + spec.grid.height())
}

fn make_policy(algorithm: Algorithm, spec: &InstanceSpec, cfg: &EpisodeConfig) -> Result<Box<dyn ObserverPolicy>> {
    let seed = derive_seed(cfg.planner.rng_seed, spec.seeds.instance);
    Ok(match algorithm {
        Algorithm::PassiveRandom => Box::new(PassiveRandom::new(seed)),
        Algorithm::SearchFollow => Box::new(SearchAndFollow::new(&spec.grid, &cfg.fov)),
        Algorithm::BeliefGreedy => Box::new(BeliefGreedy),
        Algorithm::AgrMcts => Box::new(AgrMcts::new(PlannerConfig { rng_seed: seed, ..cfg.planner })?),
    })
}

/// Runs one episode. The actor follows its precomputed path; after every
/// observation both the joint belief and the passive recognizer are updated
/// and the observer chooses its next action with `algorithm`.
pub fn run_episode(spec: &InstanceSpec, algorithm: Algorithm, cfg: &EpisodeConfig) -> Result<EpisodeRecord> {
    let map = &spec.grid;
    let actor_path = spec.actor_policy()?;
    let filter = BeliefFilter::new(map, &spec.goals, cfg.planner.epsilon, cfg.fov, cfg.belief)?;
    let mut passive = PassiveState::new(map, &spec.goals, cfg.beta)?;
    let mut policy = make_policy(algorithm, spec, cfg)?;
    let cap = cfg.metrics.max_steps.unwrap_or_else(|| default_step_cap(spec));
    let at_step = |step: usize| move |e: AgrError| AgrError::AtStep { step, source: Box::new(e) };

    let mut actor = spec.actor_start;
    let mut observer = spec.observer_start;
    let mut obs = observe(map, observer, actor, &cfg.fov);
    let mut belief = filter.update(&filter.initial(None)?, observer, obs).map_err(at_step(0))?;
    passive.observe(obs, 0);
    let mut observations = vec![obs];
    let mut steps = Vec::new();
    let mut t = 0;
    loop {
        steps.push(StepRecord {
            t,
            actor,
            observer,
            observation: obs,
            goal_marginal: belief.goal_marginal(),
            passive_posterior: passive.posterior(),
            decision: None,
            belief_matrix: cfg.full_belief_trace.then(|| belief.as_slice().to_vec()),
        });
        if actor.position == spec.goal() || t >= cap || t >= actor_path.actions.len() {
            break;
        }
        let decision = policy
            .decide(&DecisionContext { t, observer, belief: &belief, filter: &filter, observations: &observations })
            .map_err(at_step(t))?;
        let action: Action = decision.action;
        steps[t].decision = Some(decision);

        actor = step_pose(map, actor, actor_path.actions[t], false);
        observer = step_pose(map, observer, action, true);
        t += 1;
        obs = observe(map, observer, actor, &cfg.fov);
        belief = filter.step(&belief, observer, obs).map_err(at_step(t))?;
        passive.observe(obs, t);
        observations.push(obs);
    }
    Ok(EpisodeRecord { algorithm, true_goal: spec.true_goal, reached_goal: actor.position == spec.goal(), steps })
}
