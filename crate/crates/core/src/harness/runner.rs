//! Batch execution over a worker pool and the CSV/JSONL output formats.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::ablation::AblationRow;
use super::episode::{run_episode, EpisodeConfig, EpisodeRecord};
use super::instance::{ExperimentConfig, InstanceSpec};
use crate::error::{AgrError, Result};
use crate::planners::Algorithm;

/// One line of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub config: ExperimentConfig,
    pub layout_seed: u64,
    pub instance_seed: u64,
    pub algo: Algorithm,
    #[serde(rename = "CV")]
    pub cv: f64,
    #[serde(rename = "SR")]
    pub sr: u8,
    #[serde(rename = "FP")]
    pub fp: f64,
    #[serde(rename = "T")]
    pub t: usize,
    /// Wall-clock milliseconds; only filled when timing is requested so that
    /// default output stays byte-reproducible.
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BatchOptions {
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
    pub timing: bool,
}

#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub row: ResultRow,
    pub record: EpisodeRecord,
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| AgrError::InvalidConfig(format!("worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Runs `algorithm` on every instance. Results come back in input order
/// whatever the scheduling.
pub fn run_batch(
    specs: &[InstanceSpec],
    algorithm: Algorithm,
    cfg: &EpisodeConfig,
    opts: BatchOptions,
) -> Result<Vec<EpisodeOutcome>> {
    with_pool(opts.workers, || {
        specs
            .par_iter()
            .map(|spec| {
                let start = Instant::now();
                let record = run_episode(spec, algorithm, cfg)?;
                let elapsed = start.elapsed().as_secs_f64() * 1e3;
                let m = record.metrics(record.native_inference(), cfg.metrics.theta);
                let row = ResultRow {
                    config: spec.config,
                    layout_seed: spec.seeds.layout,
                    instance_seed: spec.seeds.instance,
                    algo: algorithm,
                    cv: m.cv,
                    sr: m.success as u8,
                    fp: m.final_prob,
                    t: m.terminal_time,
                    wall_ms: opts.timing.then_some(elapsed),
                };
                Ok(EpisodeOutcome { row, record })
            })
            .collect()
    })?
}

/// Dual-inference ablation over every instance, in input order.
pub fn run_ablation_batch(
    specs: &[InstanceSpec],
    strategy: Algorithm,
    cfg: &EpisodeConfig,
    workers: usize,
) -> Result<Vec<AblationRow>> {
    with_pool(workers, || {
        specs
            .par_iter()
            .map(|spec| {
                let (cv_joint, cv_passive) = super::ablation::ablation_dual_inference(spec, strategy, cfg)?;
                Ok(AblationRow {
                    config: spec.config,
                    layout_seed: spec.seeds.layout,
                    instance_seed: spec.seeds.instance,
                    strategy,
                    cv_joint,
                    cv_passive,
                })
            })
            .collect()
    })?
}

/// Writes `{stem}_{algo}.jsonl` into `dir`.
pub fn write_trace(dir: &Path, spec: &InstanceSpec, record: &EpisodeRecord) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}_{}.jsonl", spec.file_stem(), record.algorithm));
    std::fs::write(path, record.to_jsonl()?)?;
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(AgrError::from)).collect()
}
