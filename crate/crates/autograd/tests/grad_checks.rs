//! Finite-difference verification of every differentiable op, at both
//! precisions, over 10 random draws each. Inputs are sampled with margins
//! that keep probe points away from kinks and domain edges, so the central
//! difference is a valid reference everywhere it is compared.

mod common;

use autograd::gradcheck::assert_grad_check;
use autograd::{dual_fn, from_f64_tensor, Rng, Tensor};
use common::*;

const EPS: f64 = 1e-4;
const TOL32: f64 = 1e-4;
const TOL64: f64 = 1e-6;
// Longer accumulation chains (matmul, conv, composites) see more f32 noise.
const TOL32_HEAVY: f64 = 5e-4;

#[test]
fn grad_add_sub_same_shape() {
    for seed in 0..10 {
        let mut rng = Rng::new(101 + seed);
        let a = t_any(&[2, 3], &mut rng, -1.5, 1.5);
        let b = t_any(&[2, 3], &mut rng, -1.5, 1.5);
        let w = weight(&[2, 3], &mut rng);
        let f = dual_fn!(|g, xs| {
            let s = g.add(xs[0], xs[1])?;
            let d = g.sub(s, xs[1])?;
            let both = g.add(s, d)?;
            let yw = g.mul(both, xs[2])?;
            g.sum_all(yw)
        });
        assert_grad_check("add_sub", &f, &[a, b, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_mul_div_same_shape() {
    for seed in 0..10 {
        let mut rng = Rng::new(202 + seed);
        let a = t_any(&[3, 4], &mut rng, -1.5, 1.5);
        let b = t_pos(&[3, 4], &mut rng, 0.5, 2.0);
        let w = weight(&[3, 4], &mut rng);
        let f = dual_fn!(|g, xs| {
            let p = g.mul(xs[0], xs[1])?;
            let q = g.div(p, xs[1])?;
            let y = g.add(p, q)?;
            let yw = g.mul(y, xs[2])?;
            g.sum_all(yw)
        });
        assert_grad_check("mul_div", &f, &[a, b, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_add_broadcast() {
    for seed in 0..10 {
        let mut rng = Rng::new(303 + seed);
        let a = t_any(&[2, 3, 4], &mut rng, -1.5, 1.5);
        let b = t_any(&[3, 1], &mut rng, -1.5, 1.5);
        let s = t_any(&[], &mut rng, -1.0, 1.0);
        let w = weight(&[2, 3, 4], &mut rng);
        let f = dual_fn!(|g, xs| {
            let y0 = g.add(xs[0], xs[1])?;
            let y1 = g.add(y0, xs[2])?;
            let yw = g.mul(y1, xs[3])?;
            g.sum_all(yw)
        });
        assert_grad_check("add_broadcast", &f, &[a, b, s, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_mul_broadcast_middle_axis() {
    for seed in 0..10 {
        let mut rng = Rng::new(404 + seed);
        let a = t_any(&[2, 3, 4], &mut rng, -1.5, 1.5);
        let b = t_any(&[1, 3, 1], &mut rng, -1.5, 1.5);
        let w = weight(&[2, 3, 4], &mut rng);
        let f = dual_fn!(|g, xs| {
            let y = g.mul(xs[0], xs[1])?;
            let yw = g.mul(y, xs[2])?;
            g.sum_all(yw)
        });
        assert_grad_check("mul_broadcast", &f, &[a, b, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_div_broadcast() {
    for seed in 0..10 {
        let mut rng = Rng::new(505 + seed);
        let a = t_any(&[2, 3], &mut rng, -1.5, 1.5);
        let b = t_pos(&[3], &mut rng, 0.5, 2.0);
        let w = weight(&[2, 3], &mut rng);
        let f = dual_fn!(|g, xs| {
            let y = g.div(xs[0], xs[1])?;
            let yw = g.mul(y, xs[2])?;
            g.sum_all(yw)
        });
        assert_grad_check("div_broadcast", &f, &[a, b, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_minimum_maximum() {
    for seed in 0..10 {
        let mut rng = Rng::new(606 + seed);
        let (a, b) = pair_separated(&[3, 4], &mut rng);
        let w = weight(&[3, 4], &mut rng);
        let f = dual_fn!(|g, xs| {
            let lo = g.minimum(xs[0], xs[1])?;
            let hi = g.maximum(xs[0], xs[1])?;
            let y = g.sub(hi, lo)?;
            let yw = g.mul(y, xs[2])?;
            g.sum_all(yw)
        });
        assert_grad_check("min_max", &f, &[a, b, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_minimum_broadcast_scalar() {
    for seed in 0..10 {
        let mut rng = Rng::new(707 + seed);
        // Entries keep at least 0.2 distance from the 0-centered threshold.
        let a = t_away(&[2, 3], &mut rng, 0.3, 1.5);
        let b = t_any(&[], &mut rng, -0.1, 0.1);
        let w = weight(&[2, 3], &mut rng);
        let f = dual_fn!(|g, xs| {
            let y = g.maximum(xs[0], xs[1])?;
            let yw = g.mul(y, xs[2])?;
            g.sum_all(yw)
        });
        assert_grad_check("max_scalar", &f, &[a, b, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_smooth_unaries() {
    for seed in 0..10 {
        let mut rng = Rng::new(808 + seed);
        let x = t_any(&[2, 4], &mut rng, -2.0, 2.0);
        let w = weight(&[2, 4], &mut rng);
        let f = dual_fn!(|g, xs| {
            let a = g.sigmoid(xs[0])?;
            let b = g.tanh(xs[0])?;
            let c = g.gelu(xs[0])?;
            let d = g.exp(xs[0])?;
            let e = g.log_sigmoid(xs[0])?;
            let n = g.neg(xs[0])?;
            let s1 = g.add(a, b)?;
            let s2 = g.add(c, d)?;
            let s3 = g.add(e, n)?;
            let s4 = g.add(s1, s2)?;
            let y = g.add(s4, s3)?;
            let yw = g.mul(y, xs[1])?;
            g.sum_all(yw)
        });
        assert_grad_check("smooth_unaries", &f, &[x, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_relu_abs() {
    for seed in 0..10 {
        let mut rng = Rng::new(909 + seed);
        let x = t_away(&[3, 4], &mut rng, 0.2, 1.5);
        let w = weight(&[3, 4], &mut rng);
        let f = dual_fn!(|g, xs| {
            let r = g.relu(xs[0])?;
            let a = g.abs(xs[0])?;
            let y = g.add(r, a)?;
            let yw = g.mul(y, xs[1])?;
            g.sum_all(yw)
        });
        assert_grad_check("relu_abs", &f, &[x, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_log_sqrt_power() {
    for seed in 0..10 {
        let mut rng = Rng::new(1010 + seed);
        let x = t_pos(&[2, 3], &mut rng, 0.5, 2.5);
        let w = weight(&[2, 3], &mut rng);
        let f = dual_fn!(|g, xs| {
            let l = g.log(xs[0])?;
            let s = g.sqrt(xs[0])?;
            let p = g.power(xs[0], 1.7)?;
            let q = g.power(xs[0], 2.0)?;
            let s1 = g.add(l, s)?;
            let s2 = g.add(p, q)?;
            let y = g.add(s1, s2)?;
            let yw = g.mul(y, xs[1])?;
            g.sum_all(yw)
        });
        assert_grad_check("log_sqrt_power", &f, &[x, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_affine() {
    for seed in 0..10 {
        let mut rng = Rng::new(1111 + seed);
        let x = t_any(&[2, 5], &mut rng, -1.5, 1.5);
        let w = weight(&[2, 5], &mut rng);
        let f = dual_fn!(|g, xs| {
            let y = g.affine(xs[0], -1.3, 0.4)?;
            let yw = g.mul(y, xs[1])?;
            g.sum_all(yw)
        });
        assert_grad_check("affine", &f, &[x, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_matmul() {
    for seed in 0..10 {
        let mut rng = Rng::new(1212 + seed);
        let a = t_any(&[3, 4], &mut rng, -1.2, 1.2);
        let b = t_any(&[4, 5], &mut rng, -1.2, 1.2);
        let w = weight(&[3, 5], &mut rng);
        let f = dual_fn!(|g, xs| {
            let y = g.matmul(xs[0], xs[1])?;
            let yw = g.mul(y, xs[2])?;
            g.sum_all(yw)
        });
        assert_grad_check("matmul", &f, &[a, b, w], EPS, TOL32_HEAVY, TOL64);
    }
}

#[test]
fn grad_bmm() {
    for seed in 0..10 {
        let mut rng = Rng::new(1313 + seed);
        let a = t_any(&[2, 3, 4], &mut rng, -1.2, 1.2);
        let b = t_any(&[2, 4, 5], &mut rng, -1.2, 1.2);
        let w = weight(&[2, 3, 5], &mut rng);
        let f = dual_fn!(|g, xs| {
            let y = g.bmm(xs[0], xs[1])?;
            let yw = g.mul(y, xs[2])?;
            g.sum_all(yw)
        });
        assert_grad_check("bmm", &f, &[a, b, w], EPS, TOL32_HEAVY, TOL64);
    }
}

#[test]
fn grad_conv2d_stride1_pad1_bias() {
    for seed in 0..10 {
        let mut rng = Rng::new(1414 + seed);
        let x = t_any(&[2, 3, 5, 5], &mut rng, -1.0, 1.0);
        let k = t_any(&[4, 3, 3, 3], &mut rng, -0.6, 0.6);
        let b = t_any(&[4], &mut rng, -0.5, 0.5);
        let w = weight(&[2, 4, 5, 5], &mut rng);
        let f = dual_fn!(|g, xs| {
            let y = g.conv2d(xs[0], xs[1], Some(xs[2]), 1, 1)?;
            let yw = g.mul(y, xs[3])?;
            g.sum_all(yw)
        });
        assert_grad_check("conv_s1p1", &f, &[x, k, b, w], EPS, TOL32_HEAVY, TOL64);
    }
}

#[test]
fn grad_conv2d_stride2_no_bias() {
    for seed in 0..10 {
        let mut rng = Rng::new(1515 + seed);
        let x = t_any(&[1, 2, 6, 6], &mut rng, -1.0, 1.0);
        let k = t_any(&[3, 2, 3, 3], &mut rng, -0.6, 0.6);
        let w = weight(&[1, 3, 3, 3], &mut rng);
        let f = dual_fn!(|g, xs| {
            let y = g.conv2d(xs[0], xs[1], None, 2, 1)?;
            let yw = g.mul(y, xs[2])?;
            g.sum_all(yw)
        });
        assert_grad_check("conv_s2", &f, &[x, k, w], EPS, TOL32_HEAVY, TOL64);
    }
}

#[test]
fn grad_conv2d_1x1() {
    for seed in 0..10 {
        let mut rng = Rng::new(1616 + seed);
        let x = t_any(&[2, 4, 3, 3], &mut rng, -1.0, 1.0);
        let k = t_any(&[5, 4, 1, 1], &mut rng, -0.8, 0.8);
        let b = t_any(&[5], &mut rng, -0.5, 0.5);
        let w = weight(&[2, 5, 3, 3], &mut rng);
        let f = dual_fn!(|g, xs| {
            let y = g.conv2d(xs[0], xs[1], Some(xs[2]), 1, 0)?;
            let yw = g.mul(y, xs[3])?;
            g.sum_all(yw)
        });
        assert_grad_check("conv_1x1", &f, &[x, k, b, w], EPS, TOL32_HEAVY, TOL64);
    }
}

#[test]
fn grad_reshape_permute_transpose() {
    for seed in 0..10 {
        let mut rng = Rng::new(1717 + seed);
        let x = t_any(&[2, 3, 4], &mut rng, -1.5, 1.5);
        let w = weight(&[4, 6], &mut rng);
        let f = dual_fn!(|g, xs| {
            let p = g.permute(xs[0], &[2, 0, 1])?;
            let r = g.reshape(p, vec![6, 4])?;
            let t = g.transpose(r)?;
            let yw = g.mul(t, xs[1])?;
            g.sum_all(yw)
        });
        assert_grad_check("reshape_permute", &f, &[x, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_slice() {
    for seed in 0..10 {
        let mut rng = Rng::new(1818 + seed);
        let x = t_any(&[4, 6], &mut rng, -1.5, 1.5);
        let w = weight(&[2, 3], &mut rng);
        let f = dual_fn!(|g, xs| {
            let s = g.slice(xs[0], &[(1, 3), (2, 5)])?;
            let yw = g.mul(s, xs[1])?;
            g.sum_all(yw)
        });
        assert_grad_check("slice", &f, &[x, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_concat() {
    for seed in 0..10 {
        let mut rng = Rng::new(1919 + seed);
        let a = t_any(&[2, 2, 3], &mut rng, -1.5, 1.5);
        let b = t_any(&[2, 1, 3], &mut rng, -1.5, 1.5);
        let c = t_any(&[2, 4, 3], &mut rng, -1.5, 1.5);
        let w = weight(&[2, 7, 3], &mut rng);
        let f = dual_fn!(|g, xs| {
            let y = g.concat(&[xs[0], xs[1], xs[2]], 1)?;
            let yw = g.mul(y, xs[3])?;
            g.sum_all(yw)
        });
        assert_grad_check("concat", &f, &[a, b, c, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_index_select_with_duplicates() {
    for seed in 0..10 {
        let mut rng = Rng::new(2020 + seed);
        let x = t_any(&[4, 5], &mut rng, -1.5, 1.5);
        let w = weight(&[4, 5], &mut rng);
        let f = dual_fn!(|g, xs| {
            // Row 2 selected twice: its gradient must accumulate both paths.
            let y = g.index_select(xs[0], &[2, 0, 2, 1])?;
            let yw = g.mul(y, xs[1])?;
            g.sum_all(yw)
        });
        assert_grad_check("index_select", &f, &[x, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_upsample2x() {
    for seed in 0..10 {
        let mut rng = Rng::new(2121 + seed);
        let x = t_any(&[1, 2, 3, 3], &mut rng, -1.5, 1.5);
        let w = weight(&[1, 2, 6, 6], &mut rng);
        let f = dual_fn!(|g, xs| {
            let y = g.upsample2x(xs[0])?;
            let yw = g.mul(y, xs[1])?;
            g.sum_all(yw)
        });
        assert_grad_check("upsample2x", &f, &[x, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_reductions() {
    for seed in 0..10 {
        let mut rng = Rng::new(2222 + seed);
        let x = t_any(&[2, 3, 4], &mut rng, -1.5, 1.5);
        let w = weight(&[3], &mut rng);
        let f = dual_fn!(|g, xs| {
            let s = g.sum_axes(xs[0], &[0, 2], false)?;
            let m = g.mean_axes(xs[0], &[0, 2], false)?;
            let y = g.add(s, m)?;
            let yw = g.mul(y, xs[1])?;
            let total = g.sum_all(yw)?;
            let mean = g.mean_all(yw)?;
            g.add(total, mean)
        });
        assert_grad_check("reductions", &f, &[x, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_reduce_keepdim() {
    for seed in 0..10 {
        let mut rng = Rng::new(2323 + seed);
        let x = t_any(&[2, 3, 4], &mut rng, -1.5, 1.5);
        let w = weight(&[2, 3, 4], &mut rng);
        let f = dual_fn!(|g, xs| {
            let m = g.mean_axes(xs[0], &[2], true)?;
            // Broadcast back against the input, like a normalization would.
            let d = g.sub(xs[0], m)?;
            let yw = g.mul(d, xs[1])?;
            g.sum_all(yw)
        });
        assert_grad_check("reduce_keepdim", &f, &[x, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_softmax_log_softmax() {
    for seed in 0..10 {
        let mut rng = Rng::new(2424 + seed);
        let x = t_any(&[3, 5], &mut rng, -2.0, 2.0);
        let w = weight(&[3, 5], &mut rng);
        let f = dual_fn!(|g, xs| {
            let s = g.softmax(xs[0])?;
            let l = g.log_softmax(xs[0])?;
            let y = g.add(s, l)?;
            let yw = g.mul(y, xs[1])?;
            g.sum_all(yw)
        });
        assert_grad_check("softmax", &f, &[x, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_layer_norm() {
    for seed in 0..10 {
        let mut rng = Rng::new(2525 + seed);
        let x = t_any(&[3, 6], &mut rng, -1.5, 1.5);
        let gamma = t_pos(&[6], &mut rng, 0.5, 1.5);
        let beta = t_any(&[6], &mut rng, -0.5, 0.5);
        let w = weight(&[3, 6], &mut rng);
        let f = dual_fn!(|g, xs| {
            let y = g.layer_norm(xs[0], xs[1], xs[2], 1e-5)?;
            let yw = g.mul(y, xs[3])?;
            g.sum_all(yw)
        });
        assert_grad_check("layer_norm", &f, &[x, gamma, beta, w], EPS, TOL32_HEAVY, TOL64);
    }
}

#[test]
fn grad_l2_normalize_rows() {
    for seed in 0..10 {
        let mut rng = Rng::new(2626 + seed);
        let x = t_away(&[3, 6], &mut rng, 0.3, 1.5);
        let w = weight(&[3, 6], &mut rng);
        let f = dual_fn!(|g, xs| {
            let y = g.l2_normalize_rows(xs[0], 1e-12)?;
            let yw = g.mul(y, xs[1])?;
            g.sum_all(yw)
        });
        assert_grad_check("l2_normalize", &f, &[x, w], EPS, TOL32, TOL64);
    }
}

#[test]
fn grad_cosine_similarity_2d() {
    for seed in 0..10 {
        let mut rng = Rng::new(2727 + seed);
        let a = t_away(&[3, 4], &mut rng, 0.3, 1.5);
        let b = t_away(&[2, 4], &mut rng, 0.3, 1.5);
        let w = weight(&[3, 2], &mut rng);
        let f = dual_fn!(|g, xs| {
            let y = g.cosine_similarity(xs[0], xs[1])?;
            let yw = g.mul(y, xs[2])?;
            g.sum_all(yw)
        });
        assert_grad_check("cosine_2d", &f, &[a, b, w], EPS, TOL32_HEAVY, TOL64);
    }
}

#[test]
fn grad_cosine_similarity_3d() {
    for seed in 0..10 {
        let mut rng = Rng::new(2828 + seed);
        let a = t_away(&[2, 2, 4], &mut rng, 0.3, 1.5);
        let b = t_away(&[2, 3, 4], &mut rng, 0.3, 1.5);
        let w = weight(&[2, 2, 3], &mut rng);
        let f = dual_fn!(|g, xs| {
            let y = g.cosine_similarity(xs[0], xs[1])?;
            let yw = g.mul(y, xs[2])?;
            g.sum_all(yw)
        });
        assert_grad_check("cosine_3d", &f, &[a, b, w], EPS, TOL32_HEAVY, TOL64);
    }
}

#[test]
fn grad_cross_entropy_soft() {
    for seed in 0..10 {
        let mut rng = Rng::new(2929 + seed);
        let logits = t_any(&[4, 5], &mut rng, -2.0, 2.0);
        let tgt = soft_rows(4, 5, &mut rng);
        let f = dual_fn!(|g, xs| {
            let t = from_f64_tensor(&tgt);
            g.cross_entropy_soft(xs[0], &t)
        });
        assert_grad_check("cross_entropy", &f, &[logits], EPS, TOL32_HEAVY, TOL64);
    }
}

#[test]
fn grad_bce_with_logits() {
    for seed in 0..10 {
        let mut rng = Rng::new(3030 + seed);
        let logits = t_any(&[2, 4], &mut rng, -2.0, 2.0);
        let tgt = Tensor::uniform(vec![2, 4], 0.05, 0.95, &mut rng);
        let f = dual_fn!(|g, xs| {
            let t = from_f64_tensor(&tgt);
            g.bce_with_logits(xs[0], &t)
        });
        assert_grad_check("bce", &f, &[logits], EPS, TOL32_HEAVY, TOL64);
    }
}

#[test]
fn grad_focal_bce_sum() {
    for seed in 0..10 {
        let mut rng = Rng::new(3131 + seed);
        let logits = t_any(&[2, 4], &mut rng, -2.0, 2.0);
        let hard: Vec<f64> = (0..8).map(|_| if rng.chance(0.5) { 1.0 } else { 0.0 }).collect();
        let tgt = Tensor::from_vec(vec![2, 4], hard);
        let f = dual_fn!(|g, xs| {
            let t = from_f64_tensor(&tgt);
            g.focal_bce_sum(xs[0], &t, 0.25, 2.0)
        });
        assert_grad_check("focal", &f, &[logits], EPS, TOL32_HEAVY, TOL64);
    }
}

#[test]
fn grad_mlp_end_to_end() {
    for seed in 0..10 {
        let mut rng = Rng::new(3232 + seed);
        let x = t_any(&[2, 3], &mut rng, -1.0, 1.0);
        let w1 = t_any(&[3, 4], &mut rng, -0.8, 0.8);
        let b1 = t_any(&[4], &mut rng, -0.3, 0.3);
        let w2 = t_any(&[4, 5], &mut rng, -0.8, 0.8);
        let b2 = t_any(&[5], &mut rng, -0.3, 0.3);
        let tgt = soft_rows(2, 5, &mut rng);
        let f = dual_fn!(|g, xs| {
            let h0 = g.matmul(xs[0], xs[1])?;
            let h1 = g.add(h0, xs[2])?;
            let h2 = g.gelu(h1)?;
            let h3 = g.matmul(h2, xs[3])?;
            let logits = g.add(h3, xs[4])?;
            let t = from_f64_tensor(&tgt);
            g.cross_entropy_soft(logits, &t)
        });
        assert_grad_check("mlp", &f, &[x, w1, b1, w2, b2], EPS, TOL32_HEAVY, TOL64);
    }
}
