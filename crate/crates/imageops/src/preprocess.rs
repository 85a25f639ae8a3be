//! Capsule-frame preprocessing: Lab-space contrast equalization followed by a
//! selective green/blue smoothing pass that leaves the red channel untouched.

use crate::blur::gaussian_blur;
use crate::clahe::clahe;
use crate::color::{lab_to_srgb, srgb_to_lab};
use crate::error::{ImageError, Result};
use crate::image::ImageU8;

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    /// CLAHE clip limit as a multiple of the uniform bin height; must be >= 1.
    pub clahe_clip_limit: f64,
    /// CLAHE tile grid as (rows, cols).
    pub clahe_tiles: (usize, usize),
    /// Gaussian sigma for the green/blue smoothing pass.
    pub blur_sigma: f64,
    /// Gaussian kernel half-width in pixels.
    pub blur_radius: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            clahe_clip_limit: 2.0,
            clahe_tiles: (8, 8),
            blur_sigma: 1.0,
            blur_radius: 2,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clahe_clip_limit < 1.0 {
            return Err(ImageError::InvalidArg(format!(
                "clahe_clip_limit {} must be >= 1.0",
                self.clahe_clip_limit
            )));
        }
        if self.clahe_tiles.0 == 0 || self.clahe_tiles.1 == 0 {
            return Err(ImageError::InvalidArg("clahe_tiles must be at least 1x1".into()));
        }
        if self.blur_sigma <= 0.0 {
            return Err(ImageError::InvalidArg(format!(
                "blur_sigma {} must be positive",
                self.blur_sigma
            )));
        }
        if self.blur_radius == 0 {
            return Err(ImageError::InvalidArg("blur_radius must be >= 1".into()));
        }
        Ok(())
    }

    /// Non-fatal configuration smells, rendered as human-readable strings.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let recommended = (2.0 * self.blur_sigma).ceil() as usize;
        if self.blur_radius < recommended {
            out.push(format!(
                "blur_radius {} truncates the Gaussian for sigma {}; radius >= {} recommended",
                self.blur_radius, self.blur_sigma, recommended
            ));
        }
        out
    }
}

/// Full preprocessing pipeline for one RGB frame.
///
/// The image is converted to Lab, CLAHE is applied to the L plane only, the
/// result is converted back to sRGB, and finally the green and blue channels
/// are blurred. Red carries most of the bleeding signal, so it is passed
/// through unchanged.
pub fn preprocess(image: &ImageU8, config: &PreprocessConfig) -> Result<ImageU8> {
    config.validate()?;
    image.expect_channels(3)?;

    let (l, a, b) = srgb_to_lab(image)?;
    let l_eq = clahe(&l, config.clahe_clip_limit, config.clahe_tiles)?;
    let equalized = lab_to_srgb(&l_eq, &a, &b)?;

    let mut out = equalized.clone();
    for c in [1usize, 2usize] {
        let plane = equalized.plane(c);
        let blurred = gaussian_blur(&plane, config.blur_sigma, config.blur_radius)?;
        out.set_plane(c, &blurred);
    }
    Ok(out)
}
