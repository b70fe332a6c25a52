//! One-sample two-sided Student t-test of a model family against a baseline value.

use serde::{Deserialize, Serialize};

use super::{tdist, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ShapeReliance,
    TextureReliance,
    NonSignificant,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::ShapeReliance => "shape_reliance",
            Direction::TextureReliance => "texture_reliance",
            Direction::NonSignificant => "non_significant",
        }
    }

    /// Classification shared by the t-test and the zero-variance fallback.
    pub fn classify(mean_difference: f64, p: f64, alpha: f64) -> Self {
        if p < alpha && mean_difference > 0.0 {
            Direction::ShapeReliance
        } else if p < alpha && mean_difference < 0.0 {
            Direction::TextureReliance
        } else {
            Direction::NonSignificant
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
    pub mean: f64,
    pub mean_difference: f64,
    pub direction: Direction,
    pub alpha: f64,
}

/// Tests whether the mean shape preference of a family differs from `baseline`.
pub fn strategy_t_test(values: &[f64], baseline: f64, alpha: f64) -> Result<TTestResult, StatsError> {
    let n = values.len();
    if n < 2 {
        return Err(StatsError::InsufficientSamples { needed: 2, found: n });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidInput(format!("alpha {alpha} outside (0, 1)")));
    }
    if values.iter().any(|v| !v.is_finite()) || !baseline.is_finite() {
        return Err(StatsError::InvalidInput("non-finite value".into()));
    }
    if values.iter().all(|v| *v == values[0]) {
        return Err(StatsError::ZeroVariance { mean_difference: values[0] - baseline });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let mean_difference = mean - baseline;
    let t = mean_difference / (var / n as f64).sqrt();
    let df = (n - 1) as f64;
    let p = tdist::two_sided_p(t, df);
    Ok(TTestResult {
        t,
        df,
        p_two_sided: p,
        mean,
        mean_difference,
        direction: Direction::classify(mean_difference, p, alpha),
        alpha,
    })
}
