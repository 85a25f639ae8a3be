//! Label-consistent geometric and photometric augmentation.
//!
//! Flips are exact index remaps applied first. Rotation, affine, and
//! perspective are composed into a single homography so the image is only
//! resampled once; boxes go through the forward map (corner hull), the image
//! and mask through the inverse map (bilinear / nearest). Every random
//! parameter comes from a counter-based stream keyed by (seed, index), so a
//! dataset pass is reproducible and order-independent.

use autograd::Rng;

use crate::blur::gaussian_blur;
use crate::error::{ImageError, Result};
use crate::image::{clamp_u8, ImageU8, MaskPlane};
use crate::sample::{BoxAnnotation, LabeledSample};

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentConfig {
    pub p_hflip: f64,
    pub p_vflip: f64,
    /// Rotation drawn uniformly from [-rot_degrees_max, rot_degrees_max].
    pub rot_degrees_max: f64,
    /// Translation per axis drawn from [-frac, frac] of the image dimension.
    pub affine_translate_frac: f64,
    /// Uniform scale drawn from [lo, hi]; both must be positive.
    pub affine_scale_range: (f64, f64),
    /// X-shear angle drawn from [-max, max] degrees.
    pub affine_shear_degrees: f64,
    /// Corner displacement fraction in [0, 0.5] of the half-dimension.
    pub perspective_distort_scale: f64,
    pub blur_prob: f64,
    /// Beta(alpha, alpha) shape for mixup lambdas drawn by callers.
    pub mixup_alpha: f64,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            p_hflip: 0.5,
            p_vflip: 0.5,
            rot_degrees_max: 15.0,
            affine_translate_frac: 0.1,
            affine_scale_range: (0.9, 1.1),
            affine_shear_degrees: 5.0,
            perspective_distort_scale: 0.1,
            blur_prob: 0.2,
            mixup_alpha: 0.2,
            seed: 0,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("p_hflip", self.p_hflip),
            ("p_vflip", self.p_vflip),
            ("blur_prob", self.blur_prob),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(ImageError::InvalidArg(format!("{name} {p} must be in [0, 1]")));
            }
        }
        if self.rot_degrees_max < 0.0 || self.affine_shear_degrees < 0.0 {
            return Err(ImageError::InvalidArg("rotation/shear ranges must be >= 0".into()));
        }
        if self.affine_shear_degrees >= 90.0 {
            return Err(ImageError::InvalidArg("shear must stay below 90 degrees".into()));
        }
        if !(0.0..=1.0).contains(&self.affine_translate_frac) {
            return Err(ImageError::InvalidArg(format!(
                "affine_translate_frac {} must be in [0, 1]",
                self.affine_translate_frac
            )));
        }
        let (lo, hi) = self.affine_scale_range;
        if !(lo > 0.0 && hi >= lo) {
            return Err(ImageError::InvalidArg(format!(
                "affine_scale_range ({lo}, {hi}) must satisfy 0 < lo <= hi"
            )));
        }
        if !(0.0..=0.5).contains(&self.perspective_distort_scale) {
            return Err(ImageError::InvalidArg(format!(
                "perspective_distort_scale {} must be in [0, 0.5]",
                self.perspective_distort_scale
            )));
        }
        if self.mixup_alpha <= 0.0 {
            return Err(ImageError::InvalidArg(format!(
                "mixup_alpha {} must be positive",
                self.mixup_alpha
            )));
        }
        Ok(())
    }
}

/// Concrete parameters for one augmentation, fully determined by
/// (config, index). Fields are public so tests can build exact draws.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentDraw {
    pub hflip: bool,
    pub vflip: bool,
    pub rot_degrees: f64,
    /// Fractions of width/height, not pixels.
    pub translate: (f64, f64),
    pub scale: f64,
    pub shear_degrees: f64,
    /// Per-corner displacement fractions, order: TL, TR, BR, BL.
    pub persp_offsets: [(f64, f64); 4],
    pub blur: bool,
    pub blur_sigma: f64,
}

impl AugmentDraw {
    /// Draw that leaves the sample untouched.
    pub fn identity() -> Self {
        AugmentDraw {
            hflip: false,
            vflip: false,
            rot_degrees: 0.0,
            translate: (0.0, 0.0),
            scale: 1.0,
            shear_degrees: 0.0,
            persp_offsets: [(0.0, 0.0); 4],
            blur: false,
            blur_sigma: 1.0,
        }
    }

    fn is_identity_warp(&self) -> bool {
        self.rot_degrees == 0.0
            && self.translate == (0.0, 0.0)
            && self.scale == 1.0
            && self.shear_degrees == 0.0
            && self.persp_offsets.iter().all(|&(dx, dy)| dx == 0.0 && dy == 0.0)
    }
}

/// Samples the full parameter set for item `index`. The draw order is fixed
/// and every branch consumes the same number of generator outputs, so
/// changing one probability never shifts the other parameters.
pub fn sample_augment(cfg: &AugmentConfig, index: u64) -> AugmentDraw {
    let mut rng = Rng::from_key(cfg.seed, index);
    let hflip = rng.chance(cfg.p_hflip);
    let vflip = rng.chance(cfg.p_vflip);
    let rot_degrees = rng.range(-cfg.rot_degrees_max, cfg.rot_degrees_max);
    let translate = (
        rng.range(-cfg.affine_translate_frac, cfg.affine_translate_frac),
        rng.range(-cfg.affine_translate_frac, cfg.affine_translate_frac),
    );
    let scale = rng.range(cfg.affine_scale_range.0, cfg.affine_scale_range.1);
    let shear_degrees = rng.range(-cfg.affine_shear_degrees, cfg.affine_shear_degrees);
    let d = cfg.perspective_distort_scale;
    let mut persp_offsets = [(0.0, 0.0); 4];
    for o in &mut persp_offsets {
        *o = (rng.range(-d, d), rng.range(-d, d));
    }
    let blur = rng.chance(cfg.blur_prob);
    let blur_sigma = rng.range(0.4, 1.0);
    AugmentDraw {
        hflip,
        vflip,
        rot_degrees,
        translate,
        scale,
        shear_degrees,
        persp_offsets,
        blur,
        blur_sigma,
    }
}

// 3x3 homogeneous matrices, row-major. Points are column vectors (x, y, 1).
type Mat3 = [[f64; 3]; 3];

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Adjugate: a scalar multiple of the inverse, which is all a projective
/// transform needs since points are normalized by w.
fn adjugate(m: &Mat3) -> Mat3 {
    [
        [
            m[1][1] * m[2][2] - m[1][2] * m[2][1],
            m[0][2] * m[2][1] - m[0][1] * m[2][2],
            m[0][1] * m[1][2] - m[0][2] * m[1][1],
        ],
        [
            m[1][2] * m[2][0] - m[1][0] * m[2][2],
            m[0][0] * m[2][2] - m[0][2] * m[2][0],
            m[0][2] * m[1][0] - m[0][0] * m[1][2],
        ],
        [
            m[1][0] * m[2][1] - m[1][1] * m[2][0],
            m[0][1] * m[2][0] - m[0][0] * m[2][1],
            m[0][0] * m[1][1] - m[0][1] * m[1][0],
        ],
    ]
}

fn apply_h(m: &Mat3, x: f64, y: f64) -> Option<(f64, f64)> {
    let w = m[2][0] * x + m[2][1] * y + m[2][2];
    if w.abs() < 1e-12 {
        return None;
    }
    Some((
        (m[0][0] * x + m[0][1] * y + m[0][2]) / w,
        (m[1][0] * x + m[1][1] * y + m[1][2]) / w,
    ))
}

fn translation(tx: f64, ty: f64) -> Mat3 {
    [[1.0, 0.0, tx], [0.0, 1.0, ty], [0.0, 0.0, 1.0]]
}

fn about_center(cx: f64, cy: f64, m: &Mat3) -> Mat3 {
    mat_mul(&translation(cx, cy), &mat_mul(m, &translation(-cx, -cy)))
}

/// Solves the homography mapping src[i] -> dst[i], four correspondences,
/// direct 8x8 system with partial pivoting.
fn solve_homography(src: &[(f64, f64); 4], dst: &[(f64, f64); 4]) -> Result<Mat3> {
    let mut a = [[0.0f64; 9]; 8];
    for i in 0..4 {
        let (x, y) = src[i];
        let (u, v) = dst[i];
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, u];
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, v];
    }
    for col in 0..8 {
        let pivot = (col..8)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-12 {
            return Err(ImageError::DegenerateTransform);
        }
        a.swap(col, pivot);
        let pivot_row = a[col];
        for (row, r) in a.iter_mut().enumerate() {
            if row == col {
                continue;
            }
            let f = r[col] / pivot_row[col];
            for (rv, pv) in r.iter_mut().zip(&pivot_row).skip(col) {
                *rv -= f * pv;
            }
        }
    }
    let h: Vec<f64> = (0..8).map(|i| a[i][8] / a[i][i]).collect();
    Ok([[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]])
}

/// Composes the continuous part of a draw into one forward homography over
/// the continuous image domain [0,W]x[0,H] (pixel (x,y) covers
/// [x,x+1]x[y,y+1], center at (x+0.5, y+0.5)).
fn compose_warp(draw: &AugmentDraw, width: usize, height: usize) -> Result<Mat3> {
    let (w, h) = (width as f64, height as f64);
    let (cx, cy) = (w / 2.0, h / 2.0);

    let r = draw.rot_degrees.to_radians();
    let (sin, cos) = r.sin_cos();
    let rot = about_center(cx, cy, &[[cos, -sin, 0.0], [sin, cos, 0.0], [0.0, 0.0, 1.0]]);

    let sh = draw.shear_degrees.to_radians().tan();
    let s = draw.scale;
    let scale_shear = about_center(cx, cy, &[[s, s * sh, 0.0], [0.0, s, 0.0], [0.0, 0.0, 1.0]]);
    let affine = mat_mul(
        &translation(draw.translate.0 * w, draw.translate.1 * h),
        &scale_shear,
    );

    let src = [(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)];
    let mut dst = src;
    for (corner, &(dx, dy)) in dst.iter_mut().zip(&draw.persp_offsets) {
        corner.0 += dx * cx;
        corner.1 += dy * cy;
    }
    let persp = solve_homography(&src, &dst)?;

    let f = mat_mul(&persp, &mat_mul(&affine, &rot));
    if det3(&f).abs() < 1e-9 {
        return Err(ImageError::DegenerateTransform);
    }
    Ok(f)
}

fn flip_image(img: &ImageU8, horizontal: bool) -> ImageU8 {
    let mut out = img.clone();
    for y in 0..img.height {
        for x in 0..img.width {
            let (sx, sy) = if horizontal { (img.width - 1 - x, y) } else { (x, img.height - 1 - y) };
            for c in 0..img.channels {
                out.set(x, y, c, img.get(sx, sy, c));
            }
        }
    }
    out
}

fn flip_mask(mask: &MaskPlane, horizontal: bool) -> MaskPlane {
    let mut out = mask.clone();
    for y in 0..mask.height {
        for x in 0..mask.width {
            let (sx, sy) =
                if horizontal { (mask.width - 1 - x, y) } else { (x, mask.height - 1 - y) };
            out.set(x, y, mask.get(sx, sy));
        }
    }
    out
}

fn bilinear(img: &ImageU8, c: usize, x: f64, y: f64) -> Option<f64> {
    let (w, h) = (img.width, img.height);
    if x < 0.0 || y < 0.0 || x > (w - 1) as f64 || y > (h - 1) as f64 {
        return None;
    }
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let v00 = img.get(x0, y0, c) as f64;
    let v10 = img.get(x1, y0, c) as f64;
    let v01 = img.get(x0, y1, c) as f64;
    let v11 = img.get(x1, y1, c) as f64;
    Some((v00 * (1.0 - fx) + v10 * fx) * (1.0 - fy) + (v01 * (1.0 - fx) + v11 * fx) * fy)
}

fn warp_image(img: &ImageU8, f_inv: &Mat3) -> ImageU8 {
    let means = img.channel_means();
    let mut out = img.clone();
    for y in 0..img.height {
        for x in 0..img.width {
            let src = apply_h(f_inv, x as f64 + 0.5, y as f64 + 0.5);
            for (c, &mean) in means.iter().enumerate() {
                let v = src
                    .and_then(|(sx, sy)| bilinear(img, c, sx - 0.5, sy - 0.5))
                    .unwrap_or(mean);
                out.set(x, y, c, clamp_u8(v));
            }
        }
    }
    out
}

fn warp_mask(mask: &MaskPlane, f_inv: &Mat3) -> MaskPlane {
    let mut out = MaskPlane::new(mask.width, mask.height);
    for y in 0..mask.height {
        for x in 0..mask.width {
            if let Some((sx, sy)) = apply_h(f_inv, x as f64 + 0.5, y as f64 + 0.5) {
                let ix = (sx - 0.5).round();
                let iy = (sy - 0.5).round();
                if ix >= 0.0
                    && iy >= 0.0
                    && (ix as usize) < mask.width
                    && (iy as usize) < mask.height
                {
                    out.set(x, y, mask.get(ix as usize, iy as usize));
                }
            }
        }
    }
    out
}

fn warp_boxes(
    boxes: &[BoxAnnotation],
    f: &Mat3,
    width: usize,
    height: usize,
) -> Result<Vec<BoxAnnotation>> {
    let (w, h) = (width as f64, height as f64);
    let mut out = Vec::with_capacity(boxes.len());
    for b in boxes {
        let (x0, y0, x1, y1) = b.corners_px(width, height);
        let corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
        let mut min_x = f64::INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for (px, py) in corners {
            let (tx, ty) = apply_h(f, px, py).ok_or(ImageError::DegenerateTransform)?;
            min_x = min_x.min(tx);
            min_y = min_y.min(ty);
            max_x = max_x.max(tx);
            max_y = max_y.max(ty);
        }
        let cx0 = min_x.clamp(0.0, w);
        let cy0 = min_y.clamp(0.0, h);
        let cx1 = max_x.clamp(0.0, w);
        let cy1 = max_y.clamp(0.0, h);
        if (cx1 - cx0) * (cy1 - cy0) < 1.0 {
            continue;
        }
        out.push(BoxAnnotation::from_corners(cx0 / w, cy0 / h, cx1 / w, cy1 / h));
    }
    Ok(out)
}

/// Applies a draw to image, boxes, and mask consistently. Geometric stages
/// run in the order flips, then one combined warp; the optional blur is
/// photometric and leaves the labels alone.
pub fn apply_augment(sample: &LabeledSample, draw: &AugmentDraw) -> Result<LabeledSample> {
    let mut image = sample.image.clone();
    let mut boxes = sample.boxes.clone();
    let mut mask = sample.mask.clone();

    if draw.hflip {
        image = flip_image(&image, true);
        for b in &mut boxes {
            b.cx = 1.0 - b.cx;
        }
        mask = mask.map(|m| flip_mask(&m, true));
    }
    if draw.vflip {
        image = flip_image(&image, false);
        for b in &mut boxes {
            b.cy = 1.0 - b.cy;
        }
        mask = mask.map(|m| flip_mask(&m, false));
    }

    if !draw.is_identity_warp() {
        let f = compose_warp(draw, image.width, image.height)?;
        let f_inv = adjugate(&f);
        boxes = warp_boxes(&boxes, &f, image.width, image.height)?;
        mask = mask.map(|m| warp_mask(&m, &f_inv));
        image = warp_image(&image, &f_inv);
    }

    if draw.blur {
        let radius = (2.0 * draw.blur_sigma).ceil() as usize;
        let mut blurred = image.clone();
        for c in 0..image.channels {
            let plane = gaussian_blur(&image.plane(c), draw.blur_sigma, radius.max(1))?;
            blurred.set_plane(c, &plane);
        }
        image = blurred;
    }

    Ok(LabeledSample { image, class_probs: sample.class_probs, boxes, mask })
}
