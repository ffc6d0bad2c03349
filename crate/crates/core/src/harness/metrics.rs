//! Convergence, success and final-probability metrics over a belief series.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsConfig {
    /// Belief threshold for convergence and success.
    pub theta: f64,
    /// Step cap; `None` means `4 * (width + height)`.
    pub max_steps: Option<usize>,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { theta: 0.5, max_steps: None }
    }
}

/// Earliest `t` from which `series[t..]` stays at or above `theta`.
pub fn sustained_from(series: &[f64], theta: f64) -> Option<usize> {
    let mut tau = None;
    for (t, &b) in series.iter().enumerate().rev() {
        if b >= theta {
            tau = Some(t);
        } else {
            break;
        }
    }
    tau
}

/// `(T - tau) / T` for the true goal's belief series `b_0..=b_T`; 0 when the
/// threshold is never sustained through `T`, and 0 for `T = 0`.
pub fn convergence(series: &[f64], theta: f64) -> f64 {
    let Some(last) = series.len().checked_sub(1).filter(|&t| t > 0) else {
        return 0.0;
    };
    match sustained_from(series, theta) {
        Some(tau) => (last - tau) as f64 / last as f64,
        None => 0.0,
    }
}

/// `(b_T > theta, b_T)`.
pub fn success_and_final(series: &[f64], theta: f64) -> (bool, f64) {
    let fp = series.last().copied().unwrap_or(0.0);
    (fp > theta, fp)
}
