//! Human-study protocol: balanced two-section sessions, familiarization sets,
//! durable response logging, rating-matrix export and pink-noise interstitials.

mod export;
mod noise;
mod session;
mod store;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::Cue;

pub use export::{export_responses, ExportMatrix};
pub use noise::{generate_pink_noise, radial_power_slope, PinkNoiseImage};
pub use session::{create_session, familiarization_set, SessionConfig};
pub use store::{Ack, SurveyStore};

#[derive(Debug, Error)]
pub enum SurveyError {
    #[error("superclass {superclass:?} has {available} usable {cue} stimuli, need {needed}")]
    InsufficientStimuli { superclass: String, cue: Cue, available: usize, needed: usize },
    #[error("superclass {superclass:?} has {available} distinct source images, need {needed}")]
    InsufficientSources { superclass: String, available: usize, needed: usize },
    #[error("invalid session configuration: {0}")]
    InvalidConfig(String),
    #[error("{0} section already started")]
    SectionStarted(Cue),
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("expected response for task {expected}, got {got}")]
    OutOfOrder { expected: usize, got: usize },
    #[error("task {0} already answered")]
    Duplicate(usize),
    #[error("session is complete")]
    Completed,
    #[error("choice {choice:?} is not a candidate for task {index}")]
    InvalidChoice { index: usize, choice: String },
    #[error("no completed sessions to export")]
    NoData,
    #[error("noise size must be at least 64, got {0}")]
    InvalidSize(usize),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path} line {line}: {message}")]
    Corrupt { path: String, line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionOrder {
    #[default]
    ShapeFirst,
    TextureFirst,
}

impl SectionOrder {
    pub fn sections(self) -> [Cue; 2] {
        match self {
            SectionOrder::ShapeFirst => [Cue::Shape, Cue::Texture],
            SectionOrder::TextureFirst => [Cue::Texture, Cue::Shape],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub index: usize,
    pub stimulus_id: String,
    pub cue_type: Cue,
    /// Sorted superclass ids of the section's dominance group.
    pub candidate_classes: Vec<String>,
    pub noise_before: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveySession {
    pub session_id: String,
    /// Label used to group exports (e.g. one per stimulus set).
    pub dataset: String,
    pub seed: u64,
    pub order: SectionOrder,
    pub task_sequence: Vec<Task>,
    pub cursor: usize,
    pub created_at: DateTime<Utc>,
    pub completed: bool,
}

impl SurveySession {
    /// Index of the first task of `section`.
    pub fn section_start(&self, section: Cue) -> usize {
        self.task_sequence.iter().position(|t| t.cue_type == section).unwrap_or(self.task_sequence.len())
    }

    pub fn current_task(&self) -> Option<&Task> {
        self.task_sequence.get(self.cursor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub session_id: String,
    pub index: usize,
    pub chosen: String,
    pub response_time_ms: u64,
    pub received_at: DateTime<Utc>,
}
