//! sRGB to CIELAB and back, D65 white, computed per pixel in f64.
//! The matrices and thresholds follow the common reference colorimetry
//! implementations so outputs can be checked against values produced by an
//! independent library.

use crate::error::Result;
use crate::image::{clamp_u8, ImageU8, PlaneF32};

const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412453, 0.35758, 0.180423],
    [0.212671, 0.71516, 0.072169],
    [0.019334, 0.119193, 0.950227],
];

#[allow(clippy::excessive_precision)] // full digits of the inverse, kept for exact round trips
const XYZ_TO_RGB: [[f64; 3]; 3] = [
    [3.24048134320052617, -1.53715151627131852, -0.49853632616888782],
    [-0.96925494999656825, 1.87599000148989070, 0.04155592655829284],
    [0.05564663913517716, -0.20404133836651123, 1.05731106964534427],
];

const WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];

// CIE f(t) kink parameters in the conventional decimal form.
const LAB_T0: f64 = 0.008856;
const LAB_SLOPE: f64 = 7.787;
const LAB_OFFSET: f64 = 16.0 / 116.0;
const LAB_F0: f64 = 0.2068966;

fn srgb_linearize(u: f64) -> f64 {
    if u > 0.04045 {
        ((u + 0.055) / 1.055).powf(2.4)
    } else {
        u / 12.92
    }
}

fn srgb_delinearize(v: f64) -> f64 {
    if v > 0.0031308 {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    } else {
        12.92 * v
    }
}

fn lab_f(t: f64) -> f64 {
    if t > LAB_T0 {
        t.cbrt()
    } else {
        LAB_SLOPE * t + LAB_OFFSET
    }
}

fn lab_f_inv(f: f64) -> f64 {
    if f > LAB_F0 {
        f * f * f
    } else {
        (f - LAB_OFFSET) / LAB_SLOPE
    }
}

pub fn srgb_pixel_to_lab(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let lin = [
        srgb_linearize(r as f64 / 255.0),
        srgb_linearize(g as f64 / 255.0),
        srgb_linearize(b as f64 / 255.0),
    ];
    let mut f = [0.0; 3];
    for (i, row) in RGB_TO_XYZ.iter().enumerate() {
        let t = (row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2]) / WHITE[i];
        f[i] = lab_f(t);
    }
    let l = (116.0 * f[1] - 16.0).clamp(0.0, 100.0);
    (l, 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2]))
}

pub fn lab_pixel_to_srgb(l: f64, a: f64, b: f64) -> (u8, u8, u8) {
    let fy = (l + 16.0) / 116.0;
    let fx = a / 500.0 + fy;
    let fz = fy - b / 200.0;
    let xyz = [lab_f_inv(fx) * WHITE[0], lab_f_inv(fy) * WHITE[1], lab_f_inv(fz) * WHITE[2]];
    let mut out = [0u8; 3];
    for (i, row) in XYZ_TO_RGB.iter().enumerate() {
        let lin = row[0] * xyz[0] + row[1] * xyz[1] + row[2] * xyz[2];
        out[i] = clamp_u8(srgb_delinearize(lin.clamp(0.0, 1.0)) * 255.0);
    }
    (out[0], out[1], out[2])
}

/// RGB image to L, a, b planes; L in [0,100], a and b roughly in [-128,127].
pub fn srgb_to_lab(img: &ImageU8) -> Result<(PlaneF32, PlaneF32, PlaneF32)> {
    img.expect_channels(3)?;
    let n = img.width * img.height;
    let (mut l, mut a, mut b) =
        (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for px in img.data.chunks_exact(3) {
        let (lv, av, bv) = srgb_pixel_to_lab(px[0], px[1], px[2]);
        l.push(lv as f32);
        a.push(av as f32);
        b.push(bv as f32);
    }
    Ok((
        PlaneF32::from_data(img.width, img.height, l),
        PlaneF32::from_data(img.width, img.height, a),
        PlaneF32::from_data(img.width, img.height, b),
    ))
}

/// Inverse of srgb_to_lab; out-of-gamut values clamp into [0,255].
pub fn lab_to_srgb(l: &PlaneF32, a: &PlaneF32, b: &PlaneF32) -> Result<ImageU8> {
    l.same_size(a)?;
    l.same_size(b)?;
    let mut img = ImageU8::new(l.width, l.height, 3);
    for (i, ((&lv, &av), &bv)) in l.data.iter().zip(&a.data).zip(&b.data).enumerate() {
        let (r, g, bch) = lab_pixel_to_srgb(lv as f64, av as f64, bv as f64);
        img.data[i * 3] = r;
        img.data[i * 3 + 1] = g;
        img.data[i * 3 + 2] = bch;
    }
    Ok(img)
}
