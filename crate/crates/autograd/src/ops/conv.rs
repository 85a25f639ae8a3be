//! NCHW 2-D convolution via im2col + matmul. Backward recomputes the column
//! buffer from the saved input, trading a little compute for node memory.

use crate::error::{Result, TapeError};
use crate::ops::matmul::{mm, mm_nt, mm_tn};
use crate::real::Real;
use crate::shape::fmt_shape;
use crate::tape::{Backward, Ctx, Tape, VarId};

#[derive(Copy, Clone)]
struct ConvDims {
    cin: usize,
    h: usize,
    w: usize,
    cout: usize,
    kh: usize,
    kw: usize,
    stride: usize,
    pad: usize,
    oh: usize,
    ow: usize,
}

fn im2col<T: Real>(x: &[T], d: &ConvDims, col: &mut [T]) {
    let (oh, ow) = (d.oh, d.ow);
    let mut r = 0;
    for ci in 0..d.cin {
        let plane = &x[ci * d.h * d.w..(ci + 1) * d.h * d.w];
        for ki in 0..d.kh {
            for kj in 0..d.kw {
                let row = &mut col[r * oh * ow..(r + 1) * oh * ow];
                for oy in 0..oh {
                    let iy = (oy * d.stride + ki) as isize - d.pad as isize;
                    let orow = &mut row[oy * ow..(oy + 1) * ow];
                    if iy < 0 || iy >= d.h as isize {
                        for v in orow.iter_mut() {
                            *v = T::ZERO;
                        }
                        continue;
                    }
                    let irow = &plane[iy as usize * d.w..(iy as usize + 1) * d.w];
                    for (ox, v) in orow.iter_mut().enumerate() {
                        let ix = (ox * d.stride + kj) as isize - d.pad as isize;
                        *v = if ix < 0 || ix >= d.w as isize { T::ZERO } else { irow[ix as usize] };
                    }
                }
                r += 1;
            }
        }
    }
}

fn col2im_add<T: Real>(col: &[T], d: &ConvDims, x: &mut [T]) {
    let (oh, ow) = (d.oh, d.ow);
    let mut r = 0;
    for ci in 0..d.cin {
        let plane = &mut x[ci * d.h * d.w..(ci + 1) * d.h * d.w];
        for ki in 0..d.kh {
            for kj in 0..d.kw {
                let row = &col[r * oh * ow..(r + 1) * oh * ow];
                for oy in 0..oh {
                    let iy = (oy * d.stride + ki) as isize - d.pad as isize;
                    if iy < 0 || iy >= d.h as isize {
                        continue;
                    }
                    for ox in 0..ow {
                        let ix = (ox * d.stride + kj) as isize - d.pad as isize;
                        if ix >= 0 && ix < d.w as isize {
                            plane[iy as usize * d.w + ix as usize] += row[oy * ow + ox];
                        }
                    }
                }
                r += 1;
            }
        }
    }
}

struct ConvBack {
    dims: ConvDims,
    has_bias: bool,
}

impl<T: Real> Backward<T> for ConvBack {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>> {
        let d = &self.dims;
        let (xsh, x) = ctx.parents[0];
        let (_, wv) = ctx.parents[1];
        let batch = xsh[0];
        let ckk = d.cin * d.kh * d.kw;
        let spatial = d.oh * d.ow;
        let mut gx = vec![T::ZERO; x.len()];
        let mut gw = vec![T::ZERO; d.cout * ckk];
        let mut gb = vec![T::ZERO; if self.has_bias { d.cout } else { 0 }];
        let mut col = vec![T::ZERO; ckk * spatial];
        let mut gcol = vec![T::ZERO; ckk * spatial];
        for b in 0..batch {
            let xb = &x[b * d.cin * d.h * d.w..(b + 1) * d.cin * d.h * d.w];
            let gy = &ctx.out_grad[b * d.cout * spatial..(b + 1) * d.cout * spatial];
            im2col(xb, d, &mut col);
            // dW += gy(cout,sp) * col(ckk,sp)^T
            mm_nt(gy, &col, d.cout, spatial, ckk, &mut gw);
            // dcol = W(cout,ckk)^T * gy(cout,sp)
            for v in gcol.iter_mut() {
                *v = T::ZERO;
            }
            mm_tn(wv, gy, ckk, d.cout, spatial, &mut gcol);
            col2im_add(&gcol, d, &mut gx[b * d.cin * d.h * d.w..(b + 1) * d.cin * d.h * d.w]);
            if self.has_bias {
                for co in 0..d.cout {
                    let mut acc = T::ZERO;
                    for &g in &gy[co * spatial..(co + 1) * spatial] {
                        acc += g;
                    }
                    gb[co] += acc;
                }
            }
        }
        if self.has_bias {
            vec![gx, gw, gb]
        } else {
            vec![gx, gw]
        }
    }
}

impl<T: Real> Tape<T> {
    /// x (B,Cin,H,W) conv w (Cout,Cin,kh,kw) with symmetric zero padding.
    pub fn conv2d(
        &mut self,
        x: VarId,
        w: VarId,
        bias: Option<VarId>,
        stride: usize,
        pad: usize,
    ) -> Result<VarId> {
        let xsh = self.shape(x).to_vec();
        let wsh = self.shape(w).to_vec();
        if xsh.len() != 4 || wsh.len() != 4 || xsh[1] != wsh[1] {
            return Err(TapeError::ShapeMismatch {
                op: "conv2d",
                lhs: fmt_shape(&xsh),
                rhs: fmt_shape(&wsh),
            });
        }
        if stride == 0 {
            return Err(TapeError::InvalidArg { op: "conv2d", msg: "stride must be >= 1".into() });
        }
        let (batch, cin, h, w_dim) = (xsh[0], xsh[1], xsh[2], xsh[3]);
        let (cout, kh, kw) = (wsh[0], wsh[2], wsh[3]);
        if h + 2 * pad < kh || w_dim + 2 * pad < kw {
            return Err(TapeError::InvalidArg {
                op: "conv2d",
                msg: format!("kernel {kh}x{kw} larger than padded input {h}x{w_dim} (pad {pad})"),
            });
        }
        if let Some(b) = bias {
            if self.shape(b) != [cout] {
                return Err(TapeError::ShapeMismatch {
                    op: "conv2d",
                    lhs: fmt_shape(self.shape(b)),
                    rhs: fmt_shape(&[cout]),
                });
            }
        }
        let oh = (h + 2 * pad - kh) / stride + 1;
        let ow = (w_dim + 2 * pad - kw) / stride + 1;
        let dims = ConvDims { cin, h, w: w_dim, cout, kh, kw, stride, pad, oh, ow };
        let ckk = cin * kh * kw;
        let spatial = oh * ow;
        let mut out = vec![T::ZERO; batch * cout * spatial];
        let mut col = vec![T::ZERO; ckk * spatial];
        for b in 0..batch {
            let xb = &self.values(x)[b * cin * h * w_dim..(b + 1) * cin * h * w_dim];
            im2col(xb, &dims, &mut col);
            let ob = &mut out[b * cout * spatial..(b + 1) * cout * spatial];
            mm(self.values(w), &col, cout, ckk, spatial, ob);
            if let Some(bid) = bias {
                for co in 0..cout {
                    let bv = self.values(bid)[co];
                    for v in &mut ob[co * spatial..(co + 1) * spatial] {
                        *v += bv;
                    }
                }
            }
        }
        let mut parents = vec![x, w];
        if let Some(b) = bias {
            parents.push(b);
        }
        self.push(
            "conv2d",
            vec![batch, cout, oh, ow],
            out,
            parents,
            Box::new(ConvBack { dims, has_bias: bias.is_some() }),
        )
    }
}
