//! Automatic triage of generated cues ahead of manual review.
//!
//! Nothing here rejects a cue; it only marks the ones a reviewer should look
//! at first.

use serde::{Deserialize, Serialize};

use super::{CueImage, CueKind, CuePixels};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurationThresholds {
    /// Shape cues with fewer lit pixels than this are flagged.
    pub min_edge_pixels: usize,
    /// Texture cues whose luminance variance is at or below this are flagged.
    pub min_texture_variance: f64,
}

impl Default for CurationThresholds {
    fn default() -> Self {
        Self { min_edge_pixels: 50, min_texture_variance: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationEntry {
    pub stimulus_id: String,
    pub kind: CueKind,
    /// Lit pixels for shape cues, luminance variance for texture cues.
    pub statistic: f64,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationReport {
    pub entries: Vec<CurationEntry>,
    /// Stimulus ids in review order: flagged cues first, then the rest.
    pub thumbnails: Vec<String>,
}

impl CurationReport {
    pub fn flagged(&self) -> impl Iterator<Item = &CurationEntry> {
        self.entries.iter().filter(|e| !e.flags.is_empty())
    }
}

pub const INSUFFICIENT_EDGES: &str = "insufficient edges";
pub const DEGENERATE_TEXTURE: &str = "degenerate texture";

fn lit_pixels(cue: &CueImage) -> usize {
    match &cue.pixels {
        CuePixels::Gray(g) => g.pixels().filter(|p| p[0] > 0).count(),
        CuePixels::Rgb(c) => c.pixels().filter(|p| p.0.iter().any(|&v| v > 0)).count(),
    }
}

fn luminance_variance(cue: &CueImage) -> f64 {
    let values: Vec<f64> = match &cue.pixels {
        CuePixels::Gray(g) => g.pixels().map(|p| p[0] as f64).collect(),
        CuePixels::Rgb(c) => {
            c.pixels().map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64).collect()
        }
    };
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

pub fn curation_report(cues: &[CueImage], thresholds: &CurationThresholds) -> CurationReport {
    let entries: Vec<CurationEntry> = cues
        .iter()
        .map(|cue| {
            let kind = cue.provenance.kind;
            let (statistic, flag) = match kind {
                CueKind::Shape => {
                    let lit = lit_pixels(cue);
                    (lit as f64, (lit < thresholds.min_edge_pixels).then_some(INSUFFICIENT_EDGES))
                }
                CueKind::Texture => {
                    let var = luminance_variance(cue);
                    (var, (var <= thresholds.min_texture_variance).then_some(DEGENERATE_TEXTURE))
                }
            };
            CurationEntry {
                stimulus_id: cue.provenance.stimulus_id.clone(),
                kind,
                statistic,
                flags: flag.into_iter().map(String::from).collect(),
            }
        })
        .collect();
    let mut thumbnails: Vec<String> =
        entries.iter().filter(|e| !e.flags.is_empty()).map(|e| e.stimulus_id.clone()).collect();
    thumbnails.extend(entries.iter().filter(|e| e.flags.is_empty()).map(|e| e.stimulus_id.clone()));
    CurationReport { entries, thumbnails }
}
