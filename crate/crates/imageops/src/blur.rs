//! Separable Gaussian blur with clamp-to-edge sampling.

use crate::error::{ImageError, Result};
use crate::image::PlaneF32;

/// Normalized 1-D Gaussian taps covering [-radius, radius].
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let mut k: Vec<f64> = (-(radius as isize)..=radius as isize)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    for v in &mut k {
        *v /= s;
    }
    k
}

pub fn gaussian_blur(plane: &PlaneF32, sigma: f64, radius: usize) -> Result<PlaneF32> {
    if sigma <= 0.0 {
        return Err(ImageError::InvalidArg(format!("sigma {sigma} must be positive")));
    }
    let k = gaussian_kernel(sigma, radius);
    let r = radius as isize;
    let (w, h) = (plane.width as isize, plane.height as isize);

    let mut rows = PlaneF32::new(plane.width, plane.height);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, &kv) in k.iter().enumerate() {
                let sx = (x + i as isize - r).clamp(0, w - 1);
                acc += kv * plane.get(sx as usize, y as usize) as f64;
            }
            rows.set(x as usize, y as usize, acc as f32);
        }
    }
    let mut out = PlaneF32::new(plane.width, plane.height);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, &kv) in k.iter().enumerate() {
                let sy = (y + i as isize - r).clamp(0, h - 1);
                acc += kv * rows.get(x as usize, sy as usize) as f64;
            }
            out.set(x as usize, y as usize, acc as f32);
        }
    }
    Ok(out)
}
