//! Per-(algorithm, configuration) means laid out like the results table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::instance::ExperimentConfig;
use super::runner::ResultRow;
use crate::planners::Algorithm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellSummary {
    pub episodes: usize,
    pub cv: f64,
    pub sr: f64,
    pub fp: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AggregateReport {
    cells: BTreeMap<(Algorithm, ExperimentConfig), CellSummary>,
}

/// Averages CV, SR and FP per cell. Cells without rows are absent, not zero.
pub fn aggregate_report(rows: &[ResultRow]) -> AggregateReport {
    let mut sums: BTreeMap<(Algorithm, ExperimentConfig), (usize, f64, f64, f64)> = BTreeMap::new();
    for r in rows {
        let e = sums.entry((r.algo, r.config)).or_default();
        e.0 += 1;
        e.1 += r.cv;
        e.2 += f64::from(r.sr);
        e.3 += r.fp;
    }
    let cells = sums
        .into_iter()
        .map(|(k, (n, cv, sr, fp))| {
            let n_f = n as f64;
            (k, CellSummary { episodes: n, cv: cv / n_f, sr: sr / n_f, fp: fp / n_f })
        })
        .collect();
    AggregateReport { cells }
}

impl AggregateReport {
    pub fn get(&self, algo: Algorithm, config: ExperimentConfig) -> Option<&CellSummary> {
        self.cells.get(&(algo, config))
    }

    pub fn algorithms(&self) -> Vec<Algorithm> {
        let mut out: Vec<Algorithm> = self.cells.keys().map(|k| k.0).collect();
        out.dedup();
        out
    }

    /// Wide CSV: one row per algorithm, `CV/SR/FP` per configuration in
    /// column order S-E..L-H. Missing cells are empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("algo");
        for c in ExperimentConfig::ALL {
            for m in ["CV", "SR", "FP"] {
                let _ = write!(out, ",{c}_{m}");
            }
        }
        out.push('\n');
        for a in self.algorithms() {
            out.push_str(a.name());
            for c in ExperimentConfig::ALL {
                match self.get(a, c) {
                    Some(s) => {
                        let _ = write!(out, ",{:.4},{:.4},{:.4}", s.cv, s.sr, s.fp);
                    }
                    None => out.push_str(",,,"),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Fixed-width text table; missing cells print as `-`.
    pub fn to_table(&self) -> String {
        let name_w = 16;
        let mut out = format!("{:<name_w$}", "");
        for c in ExperimentConfig::ALL {
            let _ = write!(out, " | {:^20}", c.label());
        }
        out.push('\n');
        let _ = write!(out, "{:<name_w$}", "algorithm");
        for _ in ExperimentConfig::ALL {
            let _ = write!(out, " | {:>6} {:>6} {:>6}", "CV", "SR", "FP");
        }
        out.push('\n');
        out.push_str(&"-".repeat(name_w + ExperimentConfig::ALL.len() * 23));
        out.push('\n');
        for a in self.algorithms() {
            let _ = write!(out, "{:<name_w$}", a.name());
            for c in ExperimentConfig::ALL {
                match self.get(a, c) {
                    Some(s) => {
                        let _ = write!(out, " | {:>6.2} {:>6.2} {:>6.2}", s.cv, s.sr, s.fp);
                    }
                    None => {
                        let _ = write!(out, " | {:>6} {:>6} {:>6}", "-", "-", "-");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}
