//! Pixel containers: interleaved 8-bit images, float planes and binary masks.

use crate::error::{ImageError, Result};

/// Row-major interleaved 8-bit image, 1 or 3 channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageU8 {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

impl ImageU8 {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        assert!(width >= 1 && height >= 1, "empty image");
        assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
        ImageU8 { width, height, channels, data: vec![0; width * height * channels] }
    }

    pub fn from_data(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), width * height * channels, "data length mismatch");
        assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
        ImageU8 { width, height, channels, data }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: u8) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    pub fn expect_channels(&self, n: usize) -> Result<()> {
        if self.channels != n {
            return Err(ImageError::ChannelCount { expected: n, got: self.channels });
        }
        Ok(())
    }

    /// Extracts one channel as a float plane with values in [0,255].
    pub fn plane(&self, c: usize) -> PlaneF32 {
        assert!(c < self.channels);
        let mut data = Vec::with_capacity(self.width * self.height);
        for px in self.data.chunks_exact(self.channels) {
            data.push(px[c] as f32);
        }
        PlaneF32 { width: self.width, height: self.height, data }
    }

    /// Replaces one channel from a float plane in [0,255], rounding and
    /// clamping each sample.
    pub fn set_plane(&mut self, c: usize, plane: &PlaneF32) {
        assert!(c < self.channels);
        assert_eq!((plane.width, plane.height), (self.width, self.height));
        for (px, &v) in self.data.chunks_exact_mut(self.channels).zip(&plane.data) {
            px[c] = clamp_u8(v as f64);
        }
    }

    /// Per-channel means, used as the fill value for out-of-frame samples.
    pub fn channel_means(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.channels];
        for px in self.data.chunks_exact(self.channels) {
            for (s, &v) in sums.iter_mut().zip(px) {
                *s += v as f64;
            }
        }
        let n = (self.width * self.height) as f64;
        sums.iter().map(|s| s / n).collect()
    }
}

pub fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Row-major single-channel float plane.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneF32 {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl PlaneF32 {
    pub fn new(width: usize, height: usize) -> Self {
        PlaneF32 { width, height, data: vec![0.0; width * height] }
    }

    pub fn from_data(width: usize, height: usize, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), width * height, "data length mismatch");
        PlaneF32 { width, height, data }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    pub fn same_size(&self, other: &PlaneF32) -> Result<()> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(ImageError::SizeMismatch(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }
}

/// Binary segmentation mask; entries are 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskPlane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl MaskPlane {
    pub fn new(width: usize, height: usize) -> Self {
        MaskPlane { width, height, data: vec![0; width * height] }
    }

    pub fn from_data(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), width * height, "data length mismatch");
        assert!(data.iter().all(|&v| v <= 1), "mask entries must be 0 or 1");
        MaskPlane { width, height, data }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        debug_assert!(v <= 1);
        self.data[y * self.width + x] = v;
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&v| v == 1).count()
    }

    /// Tight bounding box of the set pixels as (x0, y0, x1, y1) with the
    /// maxima exclusive, or None for an empty mask.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) == 1 {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x + 1);
                    y1 = y1.max(y + 1);
                }
            }
        }
        (x0 != usize::MAX).then_some((x0, y0, x1, y1))
    }
}
