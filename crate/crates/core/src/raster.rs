//! Minimal raster types shared by the cue generators.

use image::{GrayImage, RgbImage};

/// Binary object mask (`true` = object).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![false; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    /// Pixels `>= 128` count as object.
    pub fn from_gray(img: &GrayImage) -> Self {
        let (w, h) = img.dimensions();
        Self::from_fn(w as usize, h as usize, |x, y| img.get_pixel(x as u32, y as u32)[0] >= 128)
    }

    pub fn to_gray(&self) -> GrayImage {
        GrayImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            image::Luma([if self.get(x as usize, y as usize) { 255 } else { 0 }])
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Out-of-bounds coordinates read as background.
    #[inline]
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.data[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    /// Object pixels with at least one 4-neighbour outside the object
    /// (the image exterior counts as outside).
    pub fn boundary(&self) -> Mask {
        Mask::from_fn(self.width, self.height, |x, y| {
            if !self.get(x, y) {
                return false;
            }
            let (xi, yi) = (x as isize, y as isize);
            !(self.get_signed(xi - 1, yi)
                && self.get_signed(xi + 1, yi)
                && self.get_signed(xi, yi - 1)
                && self.get_signed(xi, yi + 1))
        })
    }

    pub fn union(&self, other: &Mask) -> Mask {
        Mask {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a || b).collect(),
        }
    }

    pub fn intersection(&self, other: &Mask) -> Mask {
        Mask {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a && b).collect(),
        }
    }
}

/// Interleaved floating-point image with 1 or 3 channels.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatImage {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl FloatImage {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self { width, height, channels, data: vec![0.0; width * height * channels] }
    }

    pub fn from_rgb(img: &RgbImage) -> Self {
        let (w, h) = img.dimensions();
        Self {
            width: w as usize,
            height: h as usize,
            channels: 3,
            data: img.as_raw().iter().map(|&v| v as f64).collect(),
        }
    }

    pub fn from_gray(img: &GrayImage) -> Self {
        let (w, h) = img.dimensions();
        Self {
            width: w as usize,
            height: h as usize,
            channels: 1,
            data: img.as_raw().iter().map(|&v| v as f64).collect(),
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    /// Rec. 601 luma for RGB, identity for single-channel images.
    pub fn luminance(&self) -> FloatImage {
        if self.channels == 1 {
            return self.clone();
        }
        let data =
            self.data.chunks_exact(self.channels).map(|px| 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]).collect();
        FloatImage { width: self.width, height: self.height, channels: 1, data }
    }

    pub fn to_rgb(&self) -> RgbImage {
        assert_eq!(self.channels, 3);
        let raw = self.data.iter().map(|&v| quantize(v)).collect();
        RgbImage::from_raw(self.width as u32, self.height as u32, raw).expect("buffer size")
    }

    pub fn to_gray(&self) -> GrayImage {
        let lum = self.luminance();
        let raw = lum.data.iter().map(|&v| quantize(v)).collect();
        GrayImage::from_raw(self.width as u32, self.height as u32, raw).expect("buffer size")
    }
}

#[inline]
pub fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_of_rectangle_is_its_perimeter() {
        let m = Mask::from_fn(8, 8, |x, y| (2..6).contains(&x) && (1..7).contains(&y));
        let b = m.boundary();
        assert_eq!(b.count(), 2 * 4 + 2 * 6 - 4);
        assert!(b.get(2, 1) && b.get(5, 6) && !b.get(3, 3));
    }

    #[test]
    fn mask_touching_image_edge_has_edge_boundary() {
        let m = Mask::from_fn(3, 3, |_, _| true);
        assert_eq!(m.boundary().count(), 8);
    }
}
