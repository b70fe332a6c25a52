//! Gaussian blur restricted to a mask.
//!
//! Inside the mask the output is `G*(I·M) / G*M`: the kernel is renormalised
//! over in-mask support, so background intensities never enter the object.
//! Pixels outside the mask are returned unchanged.

use crate::raster::{FloatImage, Mask};

use super::CueError;

/// Normalised 1-D Gaussian taps for offsets `-r..=r`, `r = ceil(4σ)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (4.0 * sigma).ceil().max(1.0) as isize;
    let taps: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let total: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / total).collect()
}

/// Zero-padded separable convolution of one plane.
fn convolve_plane(plane: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &t) in kernel.iter().enumerate() {
                let xx = x as isize + k as isize - r;
                if xx >= 0 && (xx as usize) < w {
                    acc += t * plane[y * w + xx as usize];
                }
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &t) in kernel.iter().enumerate() {
                let yy = y as isize + k as isize - r;
                if yy >= 0 && (yy as usize) < h {
                    acc += t * tmp[yy as usize * w + x];
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

pub fn gaussian_blur_in_mask(image: &FloatImage, mask: &Mask, sigma: f64) -> Result<FloatImage, CueError> {
    if image.width != mask.width() || image.height != mask.height() {
        return Err(CueError::DimensionMismatch {
            image: (image.width, image.height),
            mask: (mask.width(), mask.height()),
        });
    }
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(CueError::InvalidParams(format!("blur sigma {sigma} must be positive")));
    }
    let (w, h) = (image.width, image.height);
    let kernel = gaussian_kernel(sigma);
    let m: Vec<f64> = mask.as_slice().iter().map(|&b| b as u8 as f64).collect();
    let support = convolve_plane(&m, w, h, &kernel);
    let mut out = image.clone();
    for c in 0..image.channels {
        let masked: Vec<f64> = (0..w * h).map(|i| image.data[i * image.channels + c] * m[i]).collect();
        let num = convolve_plane(&masked, w, h, &kernel);
        for i in 0..w * h {
            if m[i] > 0.0 {
                out.data[i * image.channels + c] = num[i] / support[i];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: usize, h: usize, f: impl Fn(usize, usize) -> f64) -> FloatImage {
        let mut img = FloatImage::new(w, h, 1);
        for y in 0..h {
            for x in 0..w {
                img.set(x, y, 0, f(x, y));
            }
        }
        img
    }

    #[test]
    fn constants_are_preserved() {
        let img = gray(20, 15, |_, _| 93.0);
        let mask = Mask::from_fn(20, 15, |x, y| x > 3 && y < 11);
        let out = gaussian_blur_in_mask(&img, &mask, 2.3).unwrap();
        for v in out.data {
            assert!((v - 93.0).abs() < 1e-9);
        }
    }

    #[test]
    fn impulse_becomes_isotropic_gaussian() {
        let n = 31;
        let c = 15;
        let img = gray(n, n, |x, y| if (x, y) == (c, c) { 200.0 } else { 0.0 });
        let mask = Mask::from_fn(n, n, |_, _| true);
        let out = gaussian_blur_in_mask(&img, &mask, 1.0).unwrap();
        let total: f64 = out.data.iter().sum();
        assert!((total - 200.0).abs() < 1e-6);
        // direct 2-D Gaussian: 200 * exp(-(dx²+dy²)/2) / Z with Z the discrete normaliser
        let z: f64 = (-4..=4).map(|i: i32| (-(i * i) as f64 / 2.0).exp()).sum::<f64>().powi(2);
        for (dx, dy) in [(0i32, 0i32), (1, 0), (0, 1), (2, 1), (-3, 2)] {
            let expected = 200.0 * (-((dx * dx + dy * dy) as f64) / 2.0).exp() / z;
            let got = out.get((c as i32 + dx) as usize, (c as i32 + dy) as usize, 0);
            assert!((got - expected).abs() < 1e-9, "({dx},{dy}) {got} vs {expected}");
        }
        assert!((out.get(c + 2, c, 0) - out.get(c, c + 2, 0)).abs() < 1e-12);
    }

    #[test]
    fn boundary_pixel_uses_renormalised_kernel() {
        // 5x5 image, mask = left 3 columns, background value 1000 must not bleed in.
        let img = gray(5, 5, |x, y| if x < 3 { (x + 5 * y) as f64 } else { 1000.0 });
        let mask = Mask::from_fn(5, 5, |x, _| x < 3);
        let sigma = 0.8;
        let out = gaussian_blur_in_mask(&img, &mask, sigma).unwrap();
        // hand convolution at (2, 2) over in-mask support only
        let g = |d: i32| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp();
        let (mut num, mut den, mut plain) = (0.0, 0.0, 0.0);
        let mut plain_norm = 0.0;
        for dy in -4i32..=4 {
            for dx in -4i32..=4 {
                let (x, y) = (2 + dx, 2 + dy);
                if !(0..5).contains(&x) || !(0..5).contains(&y) {
                    continue;
                }
                let wgt = g(dx) * g(dy);
                let v = img.get(x as usize, y as usize, 0);
                plain += wgt * v;
                plain_norm += wgt;
                if x < 3 {
                    num += wgt * v;
                    den += wgt;
                }
            }
        }
        let got = out.get(2, 2, 0);
        assert!((got - num / den).abs() < 1e-9, "{got} vs {}", num / den);
        assert!((got - plain / plain_norm).abs() > 1.0);
        assert_eq!(out.get(4, 1, 0), 1000.0);
    }

    #[test]
    fn mismatched_dimensions() {
        let img = gray(4, 4, |_, _| 0.0);
        let mask = Mask::new(5, 4);
        assert!(matches!(gaussian_blur_in_mask(&img, &mask, 1.0), Err(CueError::DimensionMismatch { .. })));
    }
}
