//! Observer action-selection policies behind one interface.

mod greedy;
mod mcts;
mod random;
mod sweep;

use serde::{Deserialize, Serialize};

pub use greedy::{belief_greedy_action, move_toward, BeliefGreedy};
pub use mcts::{mcts_select_action, AgrMcts, LeafValue, PlannerConfig, RewardKind, SearchTree};
pub use random::{random_action, PassiveRandom};
pub use sweep::{sweep_waypoints, SearchAndFollow};

use crate::belief::{BeliefFilter, JointBelief};
use crate::error::Result;
use crate::grid::{Action, AgentPose};
use crate::sensor::Observation;

/// Chosen action plus per-action diagnostics.
///
/// `q_estimates` and `visits` are indexed by [`Action::index`]; planners
/// without a search tree leave `visits` empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyDecision {
    pub action: Action,
    pub q_estimates: Vec<Option<f64>>,
    pub visits: Vec<u32>,
    pub tree_depth_reached: usize,
}

impl PolicyDecision {
    pub fn bare(action: Action) -> Self {
        PolicyDecision { action, q_estimates: Vec::new(), visits: Vec::new(), tree_depth_reached: 0 }
    }
}

/// Inputs available to the observer when it picks its next action.
pub struct DecisionContext<'a> {
    /// Current time step.
    pub t: usize,
    pub observer: AgentPose,
    /// Joint belief after conditioning on the latest observation.
    pub belief: &'a JointBelief,
    pub filter: &'a BeliefFilter,
    /// Observations so far, index = time step.
    pub observations: &'a [Observation],
}

pub trait ObserverPolicy {
    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<PolicyDecision>;
}

/// The four observer strategies compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    PassiveRandom,
    SearchFollow,
    BeliefGreedy,
    AgrMcts,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] =
        [Algorithm::PassiveRandom, Algorithm::SearchFollow, Algorithm::BeliefGreedy, Algorithm::AgrMcts];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::PassiveRandom => "passive-random",
            Algorithm::SearchFollow => "search-follow",
            Algorithm::BeliefGreedy => "belief-greedy",
            Algorithm::AgrMcts => "agr-mcts",
        }
    }

    /// Whether the strategy reads goals off the joint belief (otherwise the
    /// passive recognizer).
    pub fn uses_joint_belief(self) -> bool {
        matches!(self, Algorithm::BeliefGreedy | Algorithm::AgrMcts)
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| format!("unknown algorithm '{s}'"))
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
