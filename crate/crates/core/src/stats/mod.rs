//! Statistical battery: significance tests, rank/product-moment correlation,
//! inter-rater agreement and bootstrap confidence intervals.

mod bootstrap;
mod correlation;
mod kappa;
pub mod tdist;
mod ttest;

use thiserror::Error;

pub use bootstrap::{bootstrap_ci, BootstrapCi, DEFAULT_REPLICATES};
pub use correlation::{fractional_ranks, kendall_tau, pearson_r, spearman_rho};
pub use kappa::{fleiss_kappa, parse_ratings_csv, write_ratings_csv, KappaResult, RatingsMatrix};
pub use ttest::{strategy_t_test, Direction, TTestResult};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {found}")]
    InsufficientSamples { needed: usize, found: usize },
    #[error("zero variance (exact mean difference {mean_difference})")]
    ZeroVariance { mean_difference: f64 },
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("all pairs tied; tau-b undefined")]
    AllTied,
    #[error("row {row}: ratings sum to {found}, expected {expected}")]
    RowSum { row: usize, expected: u64, found: u64 },
    #[error("chance agreement is 1 (a single category is used); kappa undefined")]
    Degenerate,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
