//! Experiment harness: instance generation, episodes, metrics and reports.

mod ablation;
mod episode;
mod instance;
mod metrics;
mod report;
mod runner;

pub use ablation::{ablation_dual_inference, AblationRow};
pub use episode::{default_step_cap, run_episode, EpisodeConfig, EpisodeMetrics, EpisodeRecord, Inference, StepRecord};
pub use instance::{
    facing, generate_instances, load_instances, write_instances, DistanceLevel, ExperimentConfig, GridSize,
    InstanceSeeds, InstanceSpec, GOALS_PER_INSTANCE, INSTANCES_PER_LAYOUT, LAYOUTS_PER_CONFIG, OBSTACLE_DENSITY,
};
pub use metrics::{convergence, success_and_final, sustained_from, MetricsConfig};
pub use report::{aggregate_report, AggregateReport, CellSummary};
pub use runner::{
    read_csv, run_ablation_batch, run_batch, write_csv, write_trace, BatchOptions, EpisodeOutcome, ResultRow,
};

/// Mixes two words into a child seed (splitmix64 finalizer over a keyed sum).
pub fn derive_seed(parent: u64, stream: u64) -> u64 {
    let mut z = parent
        .wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
