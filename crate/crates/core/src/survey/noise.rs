//! 1/f ("pink") noise images by spectral shaping of white noise.

use image::{GrayImage, Luma};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::rng::stream_rng;

use super::SurveyError;

/// Target luminance statistics after shaping.
const MEAN: f64 = 127.5;
const STD: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinkNoiseImage {
    pub size: usize,
    pub seed: u64,
    #[serde(skip)]
    pub pixels: GrayImage,
}

impl PinkNoiseImage {
    pub fn png_bytes(&self) -> Vec<u8> {
        let mut buf = std::io::Cursor::new(Vec::new());
        self.pixels.write_to(&mut buf, image::ImageFormat::Png).expect("in-memory png");
        buf.into_inner()
    }
}

/// In-place 2-D FFT of a row-major `n × n` buffer.
fn fft2(buf: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    for row in buf.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for x in 0..n {
        for y in 0..n {
            col[y] = buf[y * n + x];
        }
        fft.process(&mut col);
        for y in 0..n {
            buf[y * n + x] = col[y];
        }
    }
}

#[inline]
fn radial_frequency(x: usize, y: usize, n: usize) -> f64 {
    let fx = x.min(n - x) as f64;
    let fy = y.min(n - y) as f64;
    fx.hypot(fy)
}

/// White Gaussian noise, amplitude spectrum scaled by `1/√f` (power ∝ 1/f),
/// mapped to mean 127.5 and standard deviation 40 in 8 bits.
pub fn generate_pink_noise(size: usize, seed: u64) -> Result<PinkNoiseImage, SurveyError> {
    if size < 64 {
        return Err(SurveyError::InvalidSize(size));
    }
    let n = size;
    let mut rng = stream_rng(seed, 0);
    let mut buf: Vec<Complex64> = (0..n * n).map(|_| Complex64::new(rng.sample(StandardNormal), 0.0)).collect();
    fft2(&mut buf, n, false);
    for y in 0..n {
        for x in 0..n {
            let f = radial_frequency(x, y, n);
            buf[y * n + x] *= if f == 0.0 { 0.0 } else { 1.0 / f.sqrt() };
        }
    }
    fft2(&mut buf, n, true);
    let values: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64).sqrt();
    let pixels = GrayImage::from_fn(n as u32, n as u32, |x, y| {
        let v = values[y as usize * n + x as usize];
        Luma([crate::raster::quantize(MEAN + (v - mean) / std * STD)])
    });
    Ok(PinkNoiseImage { size, seed, pixels })
}

/// Least-squares slope of log radially averaged power against log frequency,
/// over integer radii `1..n/2` of a square image.
pub fn radial_power_slope(img: &GrayImage) -> f64 {
    let n = img.width() as usize;
    assert_eq!(n, img.height() as usize, "square image expected");
    let mean = img.pixels().map(|p| p[0] as f64).sum::<f64>() / (n * n) as f64;
    let mut buf: Vec<Complex64> = img.pixels().map(|p| Complex64::new(p[0] as f64 - mean, 0.0)).collect();
    fft2(&mut buf, n, false);
    let half = n / 2;
    let mut sum = vec![0.0; half];
    let mut count = vec![0usize; half];
    for y in 0..n {
        for x in 0..n {
            let r = radial_frequency(x, y, n).round() as usize;
            if (1..half).contains(&r) {
                sum[r] += buf[y * n + x].norm_sqr();
                count[r] += 1;
            }
        }
    }
    let pts: Vec<(f64, f64)> =
        (1..half).filter(|&r| count[r] > 0).map(|r| ((r as f64).ln(), (sum[r] / count[r] as f64).ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
