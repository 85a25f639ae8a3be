//! Labeled training samples: image, class probabilities, boxes, and an
//! optional segmentation mask, plus mixup blending between two samples.

use crate::error::{ImageError, Result};
use crate::image::{clamp_u8, ImageU8, MaskPlane};

/// Axis-aligned box in normalized center coordinates, each field in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxAnnotation {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BoxAnnotation {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        BoxAnnotation { cx, cy, w, h }
    }

    /// Corner form (x0, y0, x1, y1), still normalized.
    pub fn corners(&self) -> (f64, f64, f64, f64) {
        (
            self.cx - self.w / 2.0,
            self.cy - self.h / 2.0,
            self.cx + self.w / 2.0,
            self.cy + self.h / 2.0,
        )
    }

    pub fn from_corners(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        BoxAnnotation {
            cx: (x0 + x1) / 2.0,
            cy: (y0 + y1) / 2.0,
            w: x1 - x0,
            h: y1 - y0,
        }
    }

    /// Corner form in pixel units for an image of the given size.
    pub fn corners_px(&self, width: usize, height: usize) -> (f64, f64, f64, f64) {
        let (x0, y0, x1, y1) = self.corners();
        (x0 * width as f64, y0 * height as f64, x1 * width as f64, y1 * height as f64)
    }
}

/// One training example. `class_probs` is [p_normal, p_bleeding] and must sum
/// to 1; soft labels from mixup are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub image: ImageU8,
    pub class_probs: [f64; 2],
    pub boxes: Vec<BoxAnnotation>,
    pub mask: Option<MaskPlane>,
}

impl LabeledSample {
    pub fn validate(&self) -> Result<()> {
        self.image.expect_channels(3)?;
        let s = self.class_probs[0] + self.class_probs[1];
        if (s - 1.0).abs() > 1e-6 || self.class_probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(ImageError::InvalidArg(format!(
                "class_probs {:?} must be a probability pair",
                self.class_probs
            )));
        }
        if let Some(mask) = &self.mask {
            if mask.width != self.image.width || mask.height != self.image.height {
                return Err(ImageError::SizeMismatch(format!(
                    "mask {}x{} does not match image {}x{}",
                    mask.width, mask.height, self.image.width, self.image.height
                )));
            }
        }
        Ok(())
    }
}

/// Mixup between two samples of identical size.
///
/// Pixels are blended as lam*a + (1-lam)*b and rounded back to u8; class
/// probabilities are blended exactly. Boxes and mask are structural labels
/// that cannot be blended, so they are taken from the dominant side
/// (`a` when lam >= 0.5).
pub fn mixup(a: &LabeledSample, b: &LabeledSample, lam: f64) -> Result<LabeledSample> {
    if !(0.0..=1.0).contains(&lam) {
        return Err(ImageError::InvalidArg(format!("mixup lambda {lam} must be in [0, 1]")));
    }
    if a.image.width != b.image.width
        || a.image.height != b.image.height
        || a.image.channels != b.image.channels
    {
        return Err(ImageError::SizeMismatch(format!(
            "mixup inputs {}x{}x{} vs {}x{}x{}",
            a.image.width, a.image.height, a.image.channels,
            b.image.width, b.image.height, b.image.channels
        )));
    }

    let mut data = Vec::with_capacity(a.image.data.len());
    for (&pa, &pb) in a.image.data.iter().zip(&b.image.data) {
        data.push(clamp_u8(lam * pa as f64 + (1.0 - lam) * pb as f64));
    }
    let image = ImageU8::from_data(a.image.width, a.image.height, a.image.channels, data);

    let class_probs = [
        lam * a.class_probs[0] + (1.0 - lam) * b.class_probs[0],
        lam * a.class_probs[1] + (1.0 - lam) * b.class_probs[1],
    ];
    let dominant = if lam >= 0.5 { a } else { b };
    Ok(LabeledSample {
        image,
        class_probs,
        boxes: dominant.boxes.clone(),
        mask: dominant.mask.clone(),
    })
}
