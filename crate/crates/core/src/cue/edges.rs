//! Hysteresis contour extraction confined to the object region.

use std::collections::VecDeque;

use image::{GrayImage, Luma, RgbImage};

use crate::raster::{FloatImage, Mask};

use super::{
    dilate_mask, gaussian_blur_in_mask, params_hash, CueError, CueImage, CueKind, CuePixels, CueProvenance,
    ShapeCueParams,
};

/// Sobel gradients, evaluated only where the full 3×3 stencil lies inside the mask.
fn masked_sobel(lum: &FloatImage, mask: &Mask) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = (lum.width, lum.height);
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let inside = (0..3).all(|dy| (0..3).all(|dx| mask.get(x + dx - 1, y + dy - 1)));
            if !inside {
                continue;
            }
            let p = |dx: usize, dy: usize| lum.get(x + dx - 1, y + dy - 1, 0);
            gx[y * w + x] = (p(2, 0) + 2.0 * p(2, 1) + p(2, 2)) - (p(0, 0) + 2.0 * p(0, 1) + p(0, 2));
            gy[y * w + x] = (p(0, 2) + 2.0 * p(1, 2) + p(2, 2)) - (p(0, 0) + 2.0 * p(1, 0) + p(2, 0));
        }
    }
    (gx, gy)
}

/// Non-maximum suppression along the quantised gradient direction.
fn thin(gx: &[f64], gy: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mag: Vec<f64> = gx.iter().zip(gy).map(|(a, b)| a.hypot(*b)).collect();
    let mut out = vec![0.0; w * h];
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let i = y * w + x;
            let m = mag[i];
            if m == 0.0 {
                continue;
            }
            let angle = gy[i].atan2(gx[i]).to_degrees().rem_euclid(180.0);
            let (dx, dy): (isize, isize) = if !(22.5..157.5).contains(&angle) {
                (1, 0)
            } else if angle < 67.5 {
                (1, 1)
            } else if angle < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let at = |sx: isize, sy: isize| mag[(y as isize + sy) as usize * w + (x as isize + sx) as usize];
            if m >= at(dx, dy) && m >= at(-dx, -dy) {
                out[i] = m;
            }
        }
    }
    out
}

/// Strong pixels seed an 8-connected flood through weak pixels.
fn hysteresis(mag: &[f64], w: usize, h: usize, low: f64, high: f64) -> Mask {
    let mut edges = Mask::new(w, h);
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            if mag[y * w + x] >= high {
                edges.set(x, y, true);
                queue.push_back((x, y));
            }
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                if !edges.get(nx, ny) && mag[ny * w + nx] >= low {
                    edges.set(nx, ny, true);
                    queue.push_back((nx, ny));
                }
            }
        }
    }
    edges
}

/// Edge raster (0 background, 255 edge) from an already mask-blurred image.
///
/// Interior contours come from hysteresis thresholding of in-mask gradients;
/// the mask silhouette is always drawn. Edges are widened to
/// `2·⌊(edge_thickness−1)/2⌋+1` pixels and clipped to the mask dilated by
/// `mask_dilation`.
pub fn extract_contours(blurred: &FloatImage, mask: &Mask, params: &ShapeCueParams) -> Result<GrayImage, CueError> {
    params.validate()?;
    if blurred.width != mask.width() || blurred.height != mask.height() {
        return Err(CueError::DimensionMismatch {
            image: (blurred.width, blurred.height),
            mask: (mask.width(), mask.height()),
        });
    }
    if mask.is_empty() {
        return Err(CueError::EmptyMask);
    }
    let (w, h) = (mask.width(), mask.height());
    let lum = blurred.luminance();
    let (gx, gy) = masked_sobel(&lum, mask);
    let thinned = thin(&gx, &gy, w, h);
    let interior = hysteresis(&thinned, w, h, params.edge_low, params.edge_high);
    let edges = interior.intersection(mask).union(&mask.boundary());
    let widened = dilate_mask(&edges, (params.edge_thickness - 1) / 2);
    let allowed = dilate_mask(mask, params.mask_dilation);
    let out = widened.intersection(&allowed);
    Ok(GrayImage::from_fn(w as u32, h as u32, |x, y| Luma([if out.get(x as usize, y as usize) { 255 } else { 0 }])))
}

/// Blur within the mask (sigma rescaled to the image size), then extract contours.
pub fn generate_shape_cue(
    stimulus_id: &str,
    image: &RgbImage,
    mask: &Mask,
    params: &ShapeCueParams,
) -> Result<CueImage, CueError> {
    params.validate()?;
    let src = FloatImage::from_rgb(image);
    if mask.is_empty() {
        return Err(CueError::EmptyMask);
    }
    let sigma = params.scaled_sigma(src.width, src.height);
    let blurred = gaussian_blur_in_mask(&src, mask, sigma)?;
    let pixels = extract_contours(&blurred, mask, params)?;
    Ok(CueImage {
        pixels: CuePixels::Gray(pixels),
        provenance: CueProvenance {
            stimulus_id: stimulus_id.to_string(),
            kind: CueKind::Shape,
            params_hash: params_hash(params),
        },
    })
}
