//! Core algorithms for evaluating shape/texture cue usage in vision models.
//!
//! The crate is organised around the stages of the benchmark:
//!
//! - [`data`]: manifests, superclass maps, logit dumps and mask loading.
//! - [`cue`]: shape-cue (masked blur + contour) and texture-cue (interior patch
//!   mosaic) generation from source image/mask pairs.
//! - [`metrics`]: reciprocal-rank cue sensitivity, preference, legacy
//!   cue-conflict bias and full/partial decision spaces.
//! - [`stats`]: t-test, correlations, Fleiss' kappa and bootstrap intervals.
//! - [`report`]: evaluation reports, summary tables and plot data.
//! - [`survey`]: the human-study protocol (sessions, responses, export, pink noise).

pub mod cue;
pub mod data;
pub mod metrics;
pub mod raster;
pub mod report;
pub mod rng;
pub mod stats;
pub mod survey;

pub use data::{
    Dominance, LogitRecord, ModelRun, StimulusEntry, StimulusKind, StimulusManifest, Superclass, SuperclassMap,
};
pub use metrics::{
    ConflictDecision, Cue, DecisionOutcome, DecisionSpace, EvaluationReport, PreferenceResult, RankResult,
    SensitivityResult,
};
pub use raster::Mask;
pub use stats::{BootstrapCi, KappaResult, TTestResult};
