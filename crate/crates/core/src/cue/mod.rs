//! Shape- and texture-cue generation from (source image, object mask) pairs.
//!
//! Shape cues: blur inside the mask, detect contours with hysteresis, draw
//! them white on black, always including the mask silhouette. Texture cues:
//! crop square patches of four sizes from the eroded object interior and
//! assemble them at random feathered offsets into a full-frame mosaic.

mod blur;
mod config;
mod curation;
mod edges;
mod morphology;
mod texture;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use blur::{gaussian_blur_in_mask, gaussian_kernel};
pub use config::{CueConfig, ShapeCueParams, SuperclassOverride, TextureCueParams, REFERENCE_RESOLUTION};
pub use curation::{curation_report, CurationEntry, CurationReport, CurationThresholds};
pub use edges::{extract_contours, generate_shape_cue};
pub use morphology::{dilate_mask, erode_mask};
pub use texture::{
    assemble_texture, generate_texture_cue, largest_inscribed_square, naive_tiling, normalized_autocorrelation,
    orientation_histogram, sample_patches, seam_discontinuity, Contribution, Patch, Placement, TextureMosaic,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CueError {
    #[error("erosion leaves no interior pixels")]
    EmptyInterior,
    #[error("mask is empty")]
    EmptyMask,
    #[error("no patch size fits the interior (largest square that fits: {largest_fit} px)")]
    NoFit { largest_fit: usize },
    #[error("image is {image:?} but mask is {mask:?}")]
    DimensionMismatch { image: (usize, usize), mask: (usize, usize) },
    #[error("cannot cover output: {0}")]
    InsufficientCoverage(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CueKind {
    Shape,
    Texture,
}

impl CueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CueKind::Shape => "shape",
            CueKind::Texture => "texture",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueProvenance {
    pub stimulus_id: String,
    pub kind: CueKind,
    pub params_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CuePixels {
    Gray(image::GrayImage),
    Rgb(image::RgbImage),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CueImage {
    pub pixels: CuePixels,
    pub provenance: CueProvenance,
}

impl CueImage {
    pub fn dimensions(&self) -> (u32, u32) {
        match &self.pixels {
            CuePixels::Gray(g) => g.dimensions(),
            CuePixels::Rgb(c) => c.dimensions(),
        }
    }

    pub fn save_png(&self, path: &std::path::Path) -> image::ImageResult<()> {
        match &self.pixels {
            CuePixels::Gray(g) => g.save_with_format(path, image::ImageFormat::Png),
            CuePixels::Rgb(c) => c.save_with_format(path, image::ImageFormat::Png),
        }
    }
}

/// Output file name `<superclass>__<stem>__{shape|texture}.png`.
pub fn cue_file_name(superclass: &str, stem: &str, kind: CueKind) -> String {
    format!("{superclass}__{stem}__{}.png", kind.as_str())
}

/// Stable hash of a serializable parameter set.
pub(crate) fn params_hash<T: Serialize>(params: &T) -> String {
    crate::rng::sha256_hex(serde_json::to_string(params).expect("params serialize").as_bytes())
}
