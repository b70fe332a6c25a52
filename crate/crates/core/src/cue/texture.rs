//! Interior patch sampling and feathered random-offset mosaic assembly.

use image::{Rgb, RgbImage};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::raster::{FloatImage, Mask};
use crate::rng::stream_rng;

use super::{erode_mask, params_hash, CueError, CueImage, CueKind, CuePixels, CueProvenance, TextureCueParams};

/// A square crop of the source image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Patch {
    pub size: usize,
    /// Top-left corner in source coordinates.
    pub origin: (usize, usize),
    /// Row-major RGB pixels, `size * size` entries.
    pub pixels: Vec<[u8; 3]>,
}

impl Patch {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.size + x]
    }
}

/// Where a patch was put on the output canvas (top-left may be negative).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub patch: usize,
    pub x: isize,
    pub y: isize,
    pub size: usize,
}

/// A source pixel that contributes to an output pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contribution {
    pub patch: u32,
    pub source_x: u32,
    pub source_y: u32,
}

#[derive(Debug, Clone)]
pub struct TextureMosaic {
    pub image: RgbImage,
    pub placements: Vec<Placement>,
    /// Per output pixel (row-major), every source pixel with non-zero weight.
    pub provenance: Vec<Vec<Contribution>>,
}

/// Summed-area table over the mask, `(w+1) × (h+1)`.
fn integral(mask: &Mask) -> Vec<u32> {
    let (w, h) = (mask.width(), mask.height());
    let mut sat = vec![0u32; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = 0u32;
        for x in 0..w {
            row += mask.get(x, y) as u32;
            sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + row;
        }
    }
    sat
}

/// Top-left corners whose `size × size` footprint lies entirely inside `mask`.
fn valid_origins(mask: &Mask, sat: &[u32], size: usize) -> Vec<(usize, usize)> {
    let (w, h) = (mask.width(), mask.height());
    if size > w || size > h {
        return Vec::new();
    }
    let stride = w + 1;
    let full = (size * size) as u32;
    let mut out = Vec::new();
    for y in 0..=(h - size) {
        for x in 0..=(w - size) {
            let s = sat[(y + size) * stride + x + size] + sat[y * stride + x]
                - sat[y * stride + x + size]
                - sat[(y + size) * stride + x];
            if s == full {
                out.push((x, y));
            }
        }
    }
    out
}

/// Side of the largest all-object axis-aligned square.
pub fn largest_inscribed_square(mask: &Mask) -> usize {
    let (w, h) = (mask.width(), mask.height());
    let mut prev = vec![0usize; w];
    let mut best = 0;
    for y in 0..h {
        let mut cur = vec![0usize; w];
        for x in 0..w {
            if mask.get(x, y) {
                cur[x] = if x == 0 || y == 0 { 1 } else { 1 + prev[x].min(cur[x - 1]).min(prev[x - 1]) };
                best = best.max(cur[x]);
            }
        }
        prev = cur;
    }
    best
}

/// Crop `count` patches whose footprints lie inside `interior`.
///
/// Sizes rotate through the configured sizes that fit somewhere in the
/// interior; positions are uniform over all valid placements for the size.
pub fn sample_patches(
    image: &RgbImage,
    interior: &Mask,
    params: &TextureCueParams,
    count: usize,
) -> Result<Vec<Patch>, CueError> {
    let (w, h) = image.dimensions();
    if w as usize != interior.width() || h as usize != interior.height() {
        return Err(CueError::DimensionMismatch {
            image: (w as usize, h as usize),
            mask: (interior.width(), interior.height()),
        });
    }
    if interior.is_empty() {
        return Err(CueError::EmptyInterior);
    }
    let sat = integral(interior);
    let usable: Vec<(usize, Vec<(usize, usize)>)> = params
        .patch_sizes
        .iter()
        .map(|&s| (s, valid_origins(interior, &sat, s)))
        .filter(|(_, origins)| !origins.is_empty())
        .collect();
    if usable.is_empty() {
        return Err(CueError::NoFit { largest_fit: largest_inscribed_square(interior) });
    }
    let mut rng = stream_rng(params.rng_seed, 0);
    let mut patches = Vec::with_capacity(count);
    for i in 0..count {
        let (size, origins) = &usable[i % usable.len()];
        let (ox, oy) = origins[rng.random_range(0..origins.len())];
        let mut pixels = Vec::with_capacity(size * size);
        for y in 0..*size {
            for x in 0..*size {
                pixels.push(image.get_pixel((ox + x) as u32, (oy + y) as u32).0);
            }
        }
        patches.push(Patch { size: *size, origin: (ox, oy), pixels });
    }
    Ok(patches)
}

/// Blend weight of a new patch at local `(lx, ly)`: rises linearly from the
/// patch border to 1 at `feather` pixels in.
#[inline]
fn feather_alpha(lx: usize, ly: usize, size: usize, feather: usize) -> f64 {
    let d = lx.min(ly).min(size - 1 - lx).min(size - 1 - ly);
    ((d + 1) as f64 / (feather + 1) as f64).min(1.0)
}

/// Cover the output canvas with patches at random offsets.
///
/// Repeatedly takes the first uncovered pixel (row-major), picks the next
/// patch from a reshuffled cycle, and places it at a uniformly random offset
/// that contains that pixel. Uncovered pixels take the patch value; covered
/// pixels are cross-faded with the feather ramp, so every output pixel is a
/// convex combination of patch pixels.
pub fn assemble_texture(patches: &[Patch], params: &TextureCueParams) -> Result<TextureMosaic, CueError> {
    if patches.is_empty() {
        return Err(CueError::InsufficientCoverage("no patches".into()));
    }
    let (w, h) = params.output_size;
    if w == 0 || h == 0 {
        return Err(CueError::InvalidParams("output_size must be positive".into()));
    }
    let mut rng = stream_rng(params.rng_seed, 1);
    let mut canvas = FloatImage::new(w, h, 3);
    let mut covered = vec![false; w * h];
    let mut provenance: Vec<Vec<Contribution>> = vec![Vec::new(); w * h];
    let mut placements = Vec::new();
    let mut order: Vec<usize> = Vec::new();
    let mut cursor = 0usize;

    while let Some(next) = covered[cursor..].iter().position(|c| !c).map(|p| p + cursor) {
        cursor = next;
        if order.is_empty() {
            order = (0..patches.len()).collect();
            order.shuffle(&mut rng);
        }
        let pi = order.pop().expect("refilled");
        let patch = &patches[pi];
        let s = patch.size;
        let (px, py) = (next % w, next / w);
        let x0 = px as isize - rng.random_range(0..s) as isize;
        let y0 = py as isize - rng.random_range(0..s) as isize;
        placements.push(Placement { patch: pi, x: x0, y: y0, size: s });
        for ly in 0..s {
            let y = y0 + ly as isize;
            if y < 0 || y >= h as isize {
                continue;
            }
            for lx in 0..s {
                let x = x0 + lx as isize;
                if x < 0 || x >= w as isize {
                    continue;
                }
                let i = y as usize * w + x as usize;
                let alpha = if covered[i] { feather_alpha(lx, ly, s, params.seam_feather) } else { 1.0 };
                let src = patch.get(lx, ly);
                for (c, &v) in src.iter().enumerate() {
                    let old = canvas.data[i * 3 + c];
                    canvas.data[i * 3 + c] = alpha * v as f64 + (1.0 - alpha) * old;
                }
                let contribution = Contribution {
                    patch: pi as u32,
                    source_x: (patch.origin.0 + lx) as u32,
                    source_y: (patch.origin.1 + ly) as u32,
                };
                if alpha >= 1.0 {
                    provenance[i].clear();
                }
                provenance[i].push(contribution);
                covered[i] = true;
            }
        }
    }
    Ok(TextureMosaic { image: canvas.to_rgb(), placements, provenance })
}

/// Erode the mask, crop interior patches and assemble them.
pub fn generate_texture_cue(
    stimulus_id: &str,
    image: &RgbImage,
    mask: &Mask,
    params: &TextureCueParams,
) -> Result<(CueImage, TextureMosaic), CueError> {
    params.validate()?;
    let interior = erode_mask(mask, params.mask_erosion)?;
    let patches = sample_patches(image, &interior, params, params.patch_count)?;
    let mosaic = assemble_texture(&patches, params)?;
    let cue = CueImage {
        pixels: CuePixels::Rgb(mosaic.image.clone()),
        provenance: CueProvenance {
            stimulus_id: stimulus_id.to_string(),
            kind: CueKind::Texture,
            params_hash: params_hash(params),
        },
    };
    Ok((cue, mosaic))
}

/// Periodic grid repetition of one patch (the grid-artifact baseline).
pub fn naive_tiling(patch: &Patch, output_size: (usize, usize)) -> (RgbImage, Vec<Placement>) {
    let (w, h) = output_size;
    let s = patch.size;
    let img = RgbImage::from_fn(w as u32, h as u32, |x, y| Rgb(patch.get(x as usize % s, y as usize % s)));
    let mut placements = Vec::new();
    for gy in (0..h).step_by(s) {
        for gx in (0..w).step_by(s) {
            placements.push(Placement { patch: 0, x: gx as isize, y: gy as isize, size: s });
        }
    }
    (img, placements)
}

fn luma(img: &RgbImage) -> FloatImage {
    FloatImage::from_rgb(img).luminance()
}

/// Mean absolute luminance step across placement borders.
///
/// For every placement edge inside the canvas, compares the pixel just inside
/// the footprint with its neighbour just outside.
pub fn seam_discontinuity(img: &RgbImage, placements: &[Placement]) -> f64 {
    let l = luma(img);
    let (w, h) = (l.width as isize, l.height as isize);
    let inb = |x: isize, y: isize| x >= 0 && y >= 0 && x < w && y < h;
    let at = |x: isize, y: isize| l.get(x as usize, y as usize, 0);
    let (mut sum, mut n) = (0.0, 0usize);
    for p in placements {
        let s = p.size as isize;
        let (x0, y0, x1, y1) = (p.x, p.y, p.x + s - 1, p.y + s - 1);
        for t in 0..s {
            let pairs = [
                ((x0, y0 + t), (x0 - 1, y0 + t)),
                ((x1, y0 + t), (x1 + 1, y0 + t)),
                ((x0 + t, y0), (x0 + t, y0 - 1)),
                ((x0 + t, y1), (x0 + t, y1 + 1)),
            ];
            for ((ax, ay), (bx, by)) in pairs {
                if inb(ax, ay) && inb(bx, by) {
                    sum += (at(ax, ay) - at(bx, by)).abs();
                    n += 1;
                }
            }
        }
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Pearson correlation between the luminance image and itself shifted by `(dx, dy)`.
pub fn normalized_autocorrelation(img: &RgbImage, dx: usize, dy: usize) -> f64 {
    let l = luma(img);
    let (w, h) = (l.width, l.height);
    if dx >= w || dy >= h {
        return 0.0;
    }
    let mut a = Vec::with_capacity((w - dx) * (h - dy));
    let mut b = Vec::with_capacity((w - dx) * (h - dy));
    for y in 0..h - dy {
        for x in 0..w - dx {
            a.push(l.get(x, y, 0));
            b.push(l.get(x + dx, y + dy, 0));
        }
    }
    crate::stats::pearson_r(&a, &b).unwrap_or(0.0)
}

/// Magnitude-weighted histogram of gradient orientation (mod 180°), normalised to sum 1.
///
/// Only pixels where `region` holds and the gradient magnitude exceeds
/// `min_magnitude` are counted.
pub fn orientation_histogram(img: &RgbImage, region: Option<&Mask>, bins: usize, min_magnitude: f64) -> Vec<f64> {
    let l = luma(img);
    let (w, h) = (l.width, l.height);
    let mut hist = vec![0.0; bins];
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            if let Some(r) = region {
                let inside = (0..3).all(|dy| (0..3).all(|dx| r.get(x + dx - 1, y + dy - 1)));
                if !inside {
                    continue;
                }
            }
            let gx = l.get(x + 1, y, 0) - l.get(x - 1, y, 0);
            let gy = l.get(x, y + 1, 0) - l.get(x, y - 1, 0);
            let m = gx.hypot(gy);
            if m <= min_magnitude {
                continue;
            }
            let angle = gy.atan2(gx).rem_euclid(std::f64::consts::PI);
            let bin = ((angle / std::f64::consts::PI * bins as f64) as usize).min(bins - 1);
            hist[bin] += m;
        }
    }
    let total: f64 = hist.iter().sum();
    if total > 0.0 {
        hist.iter_mut().for_each(|v| *v /= total);
    }
    hist
}
