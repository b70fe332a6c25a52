//! Percentile bootstrap interval for a mean.
//!
//! Replicate `b` draws from its own ChaCha stream (`seed`, `b`), so the
//! interval is identical whatever the rayon schedule.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::rng::stream_rng;

pub const DEFAULT_REPLICATES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub replicates: usize,
    pub seed: u64,
}

/// Linear-interpolated quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn bootstrap_ci(values: &[f64], level: f64, replicates: usize, seed: u64) -> Result<BootstrapCi, StatsError> {
    if values.is_empty() {
        return Err(StatsError::InsufficientSamples { needed: 1, found: 0 });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::InvalidInput(format!("level {level} outside (0, 1)")));
    }
    if replicates == 0 {
        return Err(StatsError::InvalidInput("replicates must be positive".into()));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut means: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let mut sum = 0.0;
            for _ in 0..n {
                sum += values[rng.random_range(0..n)];
            }
            sum / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok(BootstrapCi {
        mean,
        lower: quantile_sorted(&means, tail),
        upper: quantile_sorted(&means, 1.0 - tail),
        level,
        replicates,
        seed,
    })
}
