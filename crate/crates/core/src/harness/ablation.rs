//! Joint belief versus passive recognition on one shared observation stream.

use serde::{Deserialize, Serialize};

use super::episode::{run_episode, EpisodeConfig, Inference};
use super::instance::{ExperimentConfig, InstanceSpec};
use super::metrics::convergence;
use crate::error::Result;
use crate::planners::Algorithm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub config: ExperimentConfig,
    pub layout_seed: u64,
    pub instance_seed: u64,
    pub strategy: Algorithm,
    pub cv_joint: f64,
    pub cv_passive: f64,
}

/// Runs one episode driven by `strategy` and scores both posteriors that were
/// fed its observations. Returns `(CV_joint, CV_passive)`.
pub fn ablation_dual_inference(spec: &InstanceSpec, strategy: Algorithm, cfg: &EpisodeConfig) -> Result<(f64, f64)> {
    let record = run_episode(spec, strategy, cfg)?;
    let theta = cfg.metrics.theta;
    Ok((
        convergence(&record.true_goal_series(Inference::Joint), theta),
        convergence(&record.true_goal_series(Inference::Passive), theta),
    ))
}
