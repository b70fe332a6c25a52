//! Square (chessboard) binary erosion and dilation.
//!
//! Both are separable running min/max filters; the image exterior counts as
//! background for erosion.

use crate::raster::Mask;

use super::CueError;

fn filter_rows(src: &Mask, radius: usize, erode: bool) -> Mask {
    let (w, h) = (src.width(), src.height());
    let r = radius as isize;
    let mut out = Mask::new(w, h);
    for y in 0..h {
        // prefix counts of object pixels along the row
        let mut prefix = vec![0usize; w + 1];
        for x in 0..w {
            prefix[x + 1] = prefix[x] + src.get(x, y) as usize;
        }
        for x in 0..w {
            let lo = x as isize - r;
            let hi = x as isize + r;
            let clo = lo.max(0) as usize;
            let chi = (hi.min(w as isize - 1)) as usize;
            let hits = prefix[chi + 1] - prefix[clo];
            let v = if erode { lo >= 0 && hi < w as isize && hits == (2 * radius + 1) } else { hits > 0 };
            out.set(x, y, v);
        }
    }
    out
}

fn transpose(m: &Mask) -> Mask {
    Mask::from_fn(m.height(), m.width(), |x, y| m.get(y, x))
}

fn square_filter(mask: &Mask, radius: usize, erode: bool) -> Mask {
    if radius == 0 {
        return mask.clone();
    }
    let rows = filter_rows(mask, radius, erode);
    transpose(&filter_rows(&transpose(&rows), radius, erode))
}

/// Keeps pixels whose whole `(2r+1)²` neighbourhood is object.
pub fn erode_mask(mask: &Mask, radius: usize) -> Result<Mask, CueError> {
    let out = square_filter(mask, radius, true);
    if out.is_empty() {
        return Err(CueError::EmptyInterior);
    }
    Ok(out)
}

/// Grows the object by `radius` pixels (chessboard distance).
pub fn dilate_mask(mask: &Mask, radius: usize) -> Mask {
    square_filter(mask, radius, false)
}
