// Shared between test binaries; not every binary uses every helper.
#![allow(dead_code)]

use autograd::{Rng, Tensor};

pub fn t_any(shape: &[usize], rng: &mut Rng, lo: f64, hi: f64) -> Tensor<f64> {
    Tensor::uniform(shape.to_vec(), lo, hi, rng).requires_grad()
}

pub fn t_pos(shape: &[usize], rng: &mut Rng, lo: f64, hi: f64) -> Tensor<f64> {
    assert!(lo > 0.0);
    Tensor::uniform(shape.to_vec(), lo, hi, rng).requires_grad()
}

/// Values with |x| in [margin, hi): keeps finite-difference probes away from
/// the kinks of relu/abs and away from zero rows for normalization ops.
pub fn t_away(shape: &[usize], rng: &mut Rng, margin: f64, hi: f64) -> Tensor<f64> {
    let n: usize = shape.iter().product();
    let values = (0..n)
        .map(|_| {
            let mag = rng.range(margin, hi);
            if rng.chance(0.5) {
                mag
            } else {
                -mag
            }
        })
        .collect();
    Tensor::from_vec(shape.to_vec(), values).requires_grad()
}

/// Pair of same-shape tensors whose elementwise difference stays at least
/// 0.25 in magnitude, so minimum/maximum never tie near a probe point.
pub fn pair_separated(shape: &[usize], rng: &mut Rng) -> (Tensor<f64>, Tensor<f64>) {
    let n: usize = shape.iter().product();
    let a: Vec<f64> = (0..n).map(|_| rng.range(-1.5, 1.5)).collect();
    let b: Vec<f64> = a
        .iter()
        .map(|&av| {
            let off = rng.range(0.25, 1.0);
            if rng.chance(0.5) {
                av + off
            } else {
                av - off
            }
        })
        .collect();
    (
        Tensor::from_vec(shape.to_vec(), a).requires_grad(),
        Tensor::from_vec(shape.to_vec(), b).requires_grad(),
    )
}

/// Untracked weight tensor. Multiplying an op output elementwise by this
/// before summing makes the loss sensitive to where each element lands, so
/// a backward pass that misroutes elements cannot match finite differences.
pub fn weight(shape: &[usize], rng: &mut Rng) -> Tensor<f64> {
    Tensor::uniform(shape.to_vec(), 0.25, 1.75, rng)
}

/// Row-stochastic targets for soft cross-entropy.
pub fn soft_rows(rows: usize, cols: usize, rng: &mut Rng) -> Tensor<f64> {
    let mut values = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let raw: Vec<f64> = (0..cols).map(|_| rng.range(0.1, 1.0)).collect();
        let s: f64 = raw.iter().sum();
        values.extend(raw.iter().map(|v| v / s));
    }
    Tensor::from_vec(vec![rows, cols], values)
}
