use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CueError;

/// Image size (square side) at which `blur_sigma` is expressed.
pub const REFERENCE_RESOLUTION: f64 = 512.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShapeCueParams {
    pub blur_sigma: f64,
    pub edge_low: f64,
    pub edge_high: f64,
    pub edge_thickness: usize,
    pub mask_dilation: usize,
}

impl Default for ShapeCueParams {
    fn default() -> Self {
        Self { blur_sigma: 3.0, edge_low: 20.0, edge_high: 60.0, edge_thickness: 1, mask_dilation: 2 }
    }
}

impl ShapeCueParams {
    pub fn validate(&self) -> Result<(), CueError> {
        if self.blur_sigma.is_nan() || self.blur_sigma <= 0.0 {
            return Err(CueError::InvalidParams(format!("blur_sigma {} must be positive", self.blur_sigma)));
        }
        if self.edge_low.is_nan() || self.edge_high.is_nan() || self.edge_low >= self.edge_high {
            return Err(CueError::InvalidParams(format!(
                "edge_low {} must be below edge_high {}",
                self.edge_low, self.edge_high
            )));
        }
        if self.edge_thickness == 0 {
            return Err(CueError::InvalidParams("edge_thickness must be positive".into()));
        }
        Ok(())
    }

    /// `blur_sigma` rescaled from the reference resolution to an image of `w × h`.
    pub fn scaled_sigma(&self, w: usize, h: usize) -> f64 {
        let diag = ((w * w + h * h) as f64).sqrt();
        self.blur_sigma * diag / (REFERENCE_RESOLUTION * std::f64::consts::SQRT_2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TextureCueParams {
    pub patch_sizes: [usize; 4],
    pub output_size: (usize, usize),
    pub mask_erosion: usize,
    pub seam_feather: usize,
    pub rng_seed: u64,
    /// Number of patches cropped per stimulus (sizes are used in rotation).
    pub patch_count: usize,
}

impl Default for TextureCueParams {
    fn default() -> Self {
        Self {
            patch_sizes: [16, 32, 64, 96],
            output_size: (224, 224),
            mask_erosion: 3,
            seam_feather: 4,
            rng_seed: 0,
            patch_count: 48,
        }
    }
}

impl TextureCueParams {
    pub fn validate(&self) -> Result<(), CueError> {
        let s = self.patch_sizes;
        if s.contains(&0) || s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CueError::InvalidParams(format!("patch_sizes {s:?} must be positive and ascending")));
        }
        let (w, h) = self.output_size;
        if w == 0 || h == 0 {
            return Err(CueError::InvalidParams("output_size must be positive".into()));
        }
        if s[3] > w.min(h) {
            return Err(CueError::InvalidParams(format!("largest patch {} exceeds output {w}x{h}", s[3])));
        }
        if self.patch_count == 0 {
            return Err(CueError::InvalidParams("patch_count must be positive".into()));
        }
        Ok(())
    }
}

/// Per-superclass adjustments ("class-adjusted" blur and friends).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuperclassOverride {
    pub blur_sigma: Option<f64>,
    pub edge_low: Option<f64>,
    pub edge_high: Option<f64>,
    pub patch_sizes: Option<[usize; 4]>,
}

/// Params file contents (TOML or JSON).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CueConfig {
    pub shape: ShapeCueParams,
    pub texture: TextureCueParams,
    pub overrides: BTreeMap<String, SuperclassOverride>,
}

impl CueConfig {
    pub fn load(path: &Path) -> Result<Self, CueError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CueError::InvalidParams(format!("{}: {e}", path.display())))?;
        let cfg: CueConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| CueError::InvalidParams(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| CueError::InvalidParams(e.to_string()))?
        };
        cfg.shape.validate()?;
        cfg.texture.validate()?;
        Ok(cfg)
    }

    pub fn shape_for(&self, superclass: &str) -> ShapeCueParams {
        let mut p = self.shape;
        if let Some(o) = self.overrides.get(superclass) {
            p.blur_sigma = o.blur_sigma.unwrap_or(p.blur_sigma);
            p.edge_low = o.edge_low.unwrap_or(p.edge_low);
            p.edge_high = o.edge_high.unwrap_or(p.edge_high);
        }
        p
    }

    pub fn texture_for(&self, superclass: &str) -> TextureCueParams {
        let mut p = self.texture;
        if let Some(sizes) = self.overrides.get(superclass).and_then(|o| o.patch_sizes) {
            p.patch_sizes = sizes;
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_overrides_apply_per_superclass() {
        let text = r#"
            [shape]
            blur_sigma = 2.0
            [overrides.clock]
            blur_sigma = 5.0
            patch_sizes = [8, 16, 24, 32]
        "#;
        let cfg: CueConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.shape_for("clock").blur_sigma, 5.0);
        assert_eq!(cfg.shape_for("cheetah").blur_sigma, 2.0);
        assert_eq!(cfg.texture_for("clock").patch_sizes, [8, 16, 24, 32]);
        assert_eq!(cfg.texture_for("cheetah").patch_sizes, [16, 32, 64, 96]);
    }

    #[test]
    fn sigma_scales_with_diagonal() {
        let p = ShapeCueParams::default();
        assert!((p.scaled_sigma(512, 512) - 3.0).abs() < 1e-12);
        assert!((p.scaled_sigma(256, 256) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_params_rejected() {
        let p = ShapeCueParams { edge_low: 50.0, edge_high: 10.0, ..Default::default() };
        assert!(p.validate().is_err());
        let t = TextureCueParams { patch_sizes: [16, 8, 32, 64], ..Default::default() };
        assert!(t.validate().is_err());
        let t = TextureCueParams { output_size: (64, 64), ..Default::default() };
        assert!(t.validate().is_err());
    }
}
