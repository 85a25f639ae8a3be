//! Fused row-wise ops over the last axis: softmax, log_softmax, layer_norm
//! and L2 row normalization. Fusing keeps them numerically stable (max
//! subtraction) with hand-derived backward rules.

use crate::error::{Result, TapeError};
use crate::real::{c, Real};
use crate::shape::fmt_shape;
use crate::tape::{Backward, Ctx, Tape, VarId};

fn last_dim(shape: &[usize], op: &'static str) -> Result<(usize, usize)> {
    if shape.is_empty() || shape[shape.len() - 1] == 0 {
        return Err(TapeError::InvalidArg { op, msg: format!("bad shape {}", fmt_shape(shape)) });
    }
    let d = shape[shape.len() - 1];
    Ok((shape.iter().product::<usize>() / d, d))
}

struct SoftmaxBack;

impl<T: Real> Backward<T> for SoftmaxBack {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>> {
        let d = *ctx.out_shape.last().unwrap();
        let mut gx = vec![T::ZERO; ctx.out.len()];
        for r in 0..ctx.out.len() / d {
            let y = &ctx.out[r * d..(r + 1) * d];
            let g = &ctx.out_grad[r * d..(r + 1) * d];
            let mut dot = T::ZERO;
            for (&yi, &gi) in y.iter().zip(g) {
                dot += yi * gi;
            }
            for ((o, &yi), &gi) in gx[r * d..(r + 1) * d].iter_mut().zip(y).zip(g) {
                *o = yi * (gi - dot);
            }
        }
        vec![gx]
    }
}

struct LogSoftmaxBack;

impl<T: Real> Backward<T> for LogSoftmaxBack {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>> {
        let d = *ctx.out_shape.last().unwrap();
        let mut gx = vec![T::ZERO; ctx.out.len()];
        for r in 0..ctx.out.len() / d {
            let y = &ctx.out[r * d..(r + 1) * d];
            let g = &ctx.out_grad[r * d..(r + 1) * d];
            let mut gsum = T::ZERO;
            for &gi in g {
                gsum += gi;
            }
            for ((o, &yi), &gi) in gx[r * d..(r + 1) * d].iter_mut().zip(y).zip(g) {
                *o = gi - yi.exp() * gsum;
            }
        }
        vec![gx]
    }
}

struct LayerNormBack {
    eps: f64,
}

impl<T: Real> Backward<T> for LayerNormBack {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>> {
        let (xsh, x) = ctx.parents[0];
        let (_, gamma) = ctx.parents[1];
        let d = *xsh.last().unwrap();
        let rows = x.len() / d;
        let eps = c::<T>(self.eps);
        let inv_d = c::<T>(1.0 / d as f64);
        let mut gx = vec![T::ZERO; x.len()];
        let mut ggamma = vec![T::ZERO; d];
        let mut gbeta = vec![T::ZERO; d];
        for r in 0..rows {
            let xr = &x[r * d..(r + 1) * d];
            let gr = &ctx.out_grad[r * d..(r + 1) * d];
            let mut mu = T::ZERO;
            for &v in xr {
                mu += v;
            }
            mu *= inv_d;
            let mut var = T::ZERO;
            for &v in xr {
                var += (v - mu) * (v - mu);
            }
            var *= inv_d;
            let inv = T::ONE / (var + eps).sqrt();
            // h = g*gamma; dx = inv*(h - mean(h) - xhat*mean(h*xhat))
            let mut mean_h = T::ZERO;
            let mut mean_hx = T::ZERO;
            for i in 0..d {
                let xhat = (xr[i] - mu) * inv;
                let h = gr[i] * gamma[i];
                mean_h += h;
                mean_hx += h * xhat;
                ggamma[i] += gr[i] * xhat;
                gbeta[i] += gr[i];
            }
            mean_h *= inv_d;
            mean_hx *= inv_d;
            for i in 0..d {
                let xhat = (xr[i] - mu) * inv;
                let h = gr[i] * gamma[i];
                gx[r * d + i] = inv * (h - mean_h - xhat * mean_hx);
            }
        }
        vec![gx, ggamma, gbeta]
    }
}

struct L2NormRowsBack {
    eps: f64,
}

impl<T: Real> Backward<T> for L2NormRowsBack {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>> {
        let (xsh, x) = ctx.parents[0];
        let d = *xsh.last().unwrap();
        let eps = c::<T>(self.eps);
        let mut gx = vec![T::ZERO; x.len()];
        for r in 0..x.len() / d {
            let xr = &x[r * d..(r + 1) * d];
            let yr = &ctx.out[r * d..(r + 1) * d];
            let gr = &ctx.out_grad[r * d..(r + 1) * d];
            let mut sq = T::ZERO;
            for &v in xr {
                sq += v * v;
            }
            let n = sq.sqrt();
            let o = &mut gx[r * d..(r + 1) * d];
            if n > eps {
                let mut dot = T::ZERO;
                for (&yi, &gi) in yr.iter().zip(gr) {
                    dot += yi * gi;
                }
                for i in 0..d {
                    o[i] = (gr[i] - yr[i] * dot) / n;
                }
            } else {
                for i in 0..d {
                    o[i] = gr[i] / eps;
                }
            }
        }
        vec![gx]
    }
}

impl<T: Real> Tape<T> {
    /// Softmax over the last axis, stable under large logits.
    pub fn softmax(&mut self, x: VarId) -> Result<VarId> {
        let shape = self.shape(x).to_vec();
        let (rows, d) = last_dim(&shape, "softmax")?;
        let xv = self.values(x);
        let mut out = vec![T::ZERO; xv.len()];
        for r in 0..rows {
            let xr = &xv[r * d..(r + 1) * d];
            let mut m = xr[0];
            for &v in xr {
                m = m.maxv(v);
            }
            let mut z = T::ZERO;
            for i in 0..d {
                let e = (xr[i] - m).exp();
                out[r * d + i] = e;
                z += e;
            }
            for v in &mut out[r * d..(r + 1) * d] {
                *v = *v / z;
            }
        }
        self.push("softmax", shape, out, vec![x], Box::new(SoftmaxBack))
    }

    pub fn log_softmax(&mut self, x: VarId) -> Result<VarId> {
        let shape = self.shape(x).to_vec();
        let (rows, d) = last_dim(&shape, "log_softmax")?;
        let xv = self.values(x);
        let mut out = vec![T::ZERO; xv.len()];
        for r in 0..rows {
            let xr = &xv[r * d..(r + 1) * d];
            let mut m = xr[0];
            for &v in xr {
                m = m.maxv(v);
            }
            let mut z = T::ZERO;
            for &v in xr {
                z += (v - m).exp();
            }
            let lz = z.ln();
            for i in 0..d {
                out[r * d + i] = xr[i] - m - lz;
            }
        }
        self.push("log_softmax", shape, out, vec![x], Box::new(LogSoftmaxBack))
    }

    /// Layer norm over the last axis with learnable gamma/beta.
    pub fn layer_norm(&mut self, x: VarId, gamma: VarId, beta: VarId, eps: f64) -> Result<VarId> {
        let shape = self.shape(x).to_vec();
        let (rows, d) = last_dim(&shape, "layer_norm")?;
        if self.shape(gamma) != [d] || self.shape(beta) != [d] {
            return Err(TapeError::ShapeMismatch {
                op: "layer_norm",
                lhs: fmt_shape(&shape),
                rhs: format!("gamma {} beta {}", fmt_shape(self.shape(gamma)), fmt_shape(self.shape(beta))),
            });
        }
        let epsv = c::<T>(eps);
        let inv_d = c::<T>(1.0 / d as f64);
        let mut out = vec![T::ZERO; self.values(x).len()];
        {
            let xv = self.values(x);
            let gv = self.values(gamma);
            let bv = self.values(beta);
            for r in 0..rows {
                let xr = &xv[r * d..(r + 1) * d];
                let mut mu = T::ZERO;
                for &v in xr {
                    mu += v;
                }
                mu *= inv_d;
                let mut var = T::ZERO;
                for &v in xr {
                    var += (v - mu) * (v - mu);
                }
                var *= inv_d;
                let inv = T::ONE / (var + epsv).sqrt();
                for i in 0..d {
                    out[r * d + i] = gv[i] * ((xr[i] - mu) * inv) + bv[i];
                }
            }
        }
        self.push(
            "layer_norm",
            shape,
            out,
            vec![x, gamma, beta],
            Box::new(LayerNormBack { eps }),
        )
    }

    /// Rows scaled to unit L2 norm (guarded by eps for near-zero rows).
    pub fn l2_normalize_rows(&mut self, x: VarId, eps: f64) -> Result<VarId> {
        let shape = self.shape(x).to_vec();
        let (rows, d) = last_dim(&shape, "l2_normalize_rows")?;
        let epsv = c::<T>(eps);
        let xv = self.values(x);
        let mut out = vec![T::ZERO; xv.len()];
        for r in 0..rows {
            let xr = &xv[r * d..(r + 1) * d];
            let mut sq = T::ZERO;
            for &v in xr {
                sq += v * v;
            }
            let n = sq.sqrt();
            let denom = if n > epsv { n } else { epsv };
            for i in 0..d {
                out[r * d + i] = xr[i] / denom;
            }
        }
        self.push("l2_normalize_rows", shape, out, vec![x], Box::new(L2NormRowsBack { eps }))
    }
}
