//! Active goal recognition on grid worlds.
//!
//! An observer agent with a limited field of view tracks an actor heading
//! to one of several candidate goals. The observer maintains a joint belief
//! over the actor's pose and goal and chooses its own moves to sharpen that
//! belief. Baselines and an experiment harness are included.

pub mod actor;
pub mod belief;
pub mod error;
pub mod grid;
pub mod harness;
pub mod passive;
pub mod planners;
pub mod sensor;

pub use actor::{plan_actor_path, ActorModel, ActorPolicy, CostMap, TransitionMatrix};
pub use belief::{BeliefConfig, BeliefFilter, DegeneratePolicy, GoalMarginal, JointBelief};
pub use error::{AgrError, Result};
pub use grid::{step_pose, Action, AgentPose, Cell, Direction, GridMap};
pub use passive::{PassivePosterior, PassiveState};
pub use planners::{mcts_select_action, Algorithm, PlannerConfig};
pub use sensor::{field_of_view, observe, FieldOfView, FovConfig, Observation};
