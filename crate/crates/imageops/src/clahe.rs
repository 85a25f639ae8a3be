//! Contrast-limited adaptive histogram equalization on a [0,100] float
//! plane. Each tile builds a 256-bin histogram, clips it at
//! clip_limit*area/256 (at least 1), spreads the excess uniformly and maps
//! values through the classical equalization formula on the clipped CDF.
//! Pixels blend the mappings of the four nearest tile centers bilinearly.
//!
//! A tile whose pixels all fall into one bin has no contrast to stretch;
//! it keeps the identity mapping, which makes constant inputs exact fixed
//! points of the whole transform.

use crate::error::{ImageError, Result};
use crate::image::PlaneF32;

pub const BINS: usize = 256;
pub const RANGE: f64 = 100.0;

#[derive(Clone, Debug)]
pub(crate) enum TileLut {
    Identity,
    Table(Box<[f64; BINS]>),
}

impl TileLut {
    #[inline]
    fn apply(&self, v: f64) -> f64 {
        match self {
            TileLut::Identity => v,
            TileLut::Table(t) => t[bin_of(v)],
        }
    }
}

#[inline]
pub(crate) fn bin_of(v: f64) -> usize {
    ((v * (BINS as f64) / RANGE) as usize).min(BINS - 1)
}

pub(crate) fn build_lut(hist: &[u32; BINS], area: usize, clip_limit: f64) -> TileLut {
    let occupied = hist.iter().filter(|&&h| h > 0).count();
    if occupied <= 1 {
        return TileLut::Identity;
    }
    let limit = ((clip_limit * area as f64 / BINS as f64) as u64).max(1);
    let mut clipped = [0u64; BINS];
    let mut excess = 0u64;
    for (c, &h) in clipped.iter_mut().zip(hist) {
        let h = h as u64;
        if h > limit {
            excess += h - limit;
            *c = limit;
        } else {
            *c = h;
        }
    }
    let base = excess / BINS as u64;
    let rem = (excess % BINS as u64) as usize;
    for (i, c) in clipped.iter_mut().enumerate() {
        *c += base + u64::from(i < rem);
    }
    let mut cdf = [0u64; BINS];
    let mut acc = 0;
    for (i, &c) in clipped.iter().enumerate() {
        acc += c;
        cdf[i] = acc;
    }
    let cdf_min = *cdf.iter().find(|&&v| v > 0).unwrap();
    let denom = area as u64 - cdf_min;
    if denom == 0 {
        return TileLut::Identity;
    }
    let mut table = Box::new([0.0; BINS]);
    for (t, &c) in table.iter_mut().zip(&cdf) {
        *t = (c.saturating_sub(cdf_min)) as f64 * RANGE / denom as f64;
    }
    TileLut::Table(table)
}

pub fn clahe(plane: &PlaneF32, clip_limit: f64, tiles: (usize, usize)) -> Result<PlaneF32> {
    let (rows, cols) = tiles;
    if clip_limit < 1.0 {
        return Err(ImageError::InvalidArg(format!("clip_limit {clip_limit} below 1")));
    }
    if rows < 1 || cols < 1 {
        return Err(ImageError::InvalidArg("tile grid must be at least 1x1".into()));
    }
    if plane.height < rows || plane.width < cols {
        return Err(ImageError::InvalidArg(format!(
            "plane {}x{} smaller than tile grid {cols}x{rows}",
            plane.width, plane.height
        )));
    }
    let (w, h) = (plane.width, plane.height);
    let x_edge = |t: usize| t * w / cols;
    let y_edge = |t: usize| t * h / rows;

    let mut luts = Vec::with_capacity(rows * cols);
    for ty in 0..rows {
        let (y0, y1) = (y_edge(ty), y_edge(ty + 1));
        for tx in 0..cols {
            let (x0, x1) = (x_edge(tx), x_edge(tx + 1));
            let mut hist = [0u32; BINS];
            for y in y0..y1 {
                for x in x0..x1 {
                    hist[bin_of(plane.get(x, y) as f64)] += 1;
                }
            }
            luts.push(build_lut(&hist, (x1 - x0) * (y1 - y0), clip_limit));
        }
    }

    let centers_x: Vec<f64> =
        (0..cols).map(|t| (x_edge(t) + x_edge(t + 1)) as f64 / 2.0 - 0.5).collect();
    let centers_y: Vec<f64> =
        (0..rows).map(|t| (y_edge(t) + y_edge(t + 1)) as f64 / 2.0 - 0.5).collect();

    let mut out = PlaneF32::new(w, h);
    for y in 0..h {
        let (ty0, ty1, wy) = neighbor_weights(&centers_y, y as f64);
        for x in 0..w {
            let (tx0, tx1, wx) = neighbor_weights(&centers_x, x as f64);
            let v = plane.get(x, y) as f64;
            let f00 = luts[ty0 * cols + tx0].apply(v);
            let f01 = luts[ty0 * cols + tx1].apply(v);
            let f10 = luts[ty1 * cols + tx0].apply(v);
            let f11 = luts[ty1 * cols + tx1].apply(v);
            let top = f00 * (1.0 - wx) + f01 * wx;
            let bottom = f10 * (1.0 - wx) + f11 * wx;
            out.set(x, y, (top * (1.0 - wy) + bottom * wy) as f32);
        }
    }
    Ok(out)
}

/// Finds the two tile centers bracketing `pos` and the blend weight toward
/// the second; positions beyond the outermost centers clamp to that tile.
fn neighbor_weights(centers: &[f64], pos: f64) -> (usize, usize, f64) {
    if centers.len() == 1 || pos <= centers[0] {
        return (0, 0, 0.0);
    }
    let last = centers.len() - 1;
    if pos >= centers[last] {
        return (last, last, 0.0);
    }
    let hi = centers.partition_point(|&c| c < pos).min(last);
    let lo = hi - 1;
    (lo, hi, (pos - centers[lo]) / (centers[hi] - centers[lo]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use autograd::Rng;

    #[test]
    fn lut_is_monotone_even_with_clipping() {
        let mut rng = Rng::new(91);
        for _ in 0..50 {
            let mut hist = [0u32; BINS];
            let area: u32 = 4096;
            for _ in 0..area {
                // Concentrated draws force heavy clipping in some bins.
                let b = rng.below(64) + rng.below(192);
                hist[b.min(BINS - 1)] += 1;
            }
            match build_lut(&hist, area as usize, 2.0) {
                TileLut::Identity => {}
                TileLut::Table(t) => {
                    for i in 1..BINS {
                        assert!(t[i] >= t[i - 1], "lut decreases at bin {i}");
                    }
                    assert!(t.iter().all(|&v| (0.0..=100.0).contains(&v)));
                }
            }
        }
    }

    #[test]
    fn single_bin_tile_keeps_identity() {
        let mut hist = [0u32; BINS];
        hist[40] = 640;
        assert!(matches!(build_lut(&hist, 640, 2.0), TileLut::Identity));
    }

    #[test]
    fn neighbor_weights_clamp_and_interpolate() {
        let centers = [3.5, 11.5, 19.5];
        assert_eq!(neighbor_weights(&centers, 1.0), (0, 0, 0.0));
        assert_eq!(neighbor_weights(&centers, 21.0), (2, 2, 0.0));
        let (lo, hi, w) = neighbor_weights(&centers, 7.5);
        assert_eq!((lo, hi), (0, 1));
        assert!((w - 0.5).abs() < 1e-12);
    }
}
