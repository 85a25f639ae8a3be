//! Data-movement ops: reshape, permute, slice, concat, index_select and
//! nearest-neighbor 2x upsampling. All are pure index permutations/copies, so
//! round trips are bit-exact.

use crate::error::{Result, TapeError};
use crate::real::Real;
use crate::shape::{fmt_shape, numel, strides, Shape};
use crate::tape::{Backward, Ctx, Tape, VarId};

/// Copy `src` (shape `shape`) into the layout obtained by permuting axes.
fn permute_copy<T: Real>(shape: &[usize], perm: &[usize], src: &[T]) -> (Shape, Vec<T>) {
    let rank = shape.len();
    let out_shape: Shape = perm.iter().map(|&p| shape[p]).collect();
    let in_strides = strides(shape);
    // stride in the input for each output axis
    let mapped: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
    let n = src.len();
    let mut out = vec![T::ZERO; n];
    let mut idx = vec![0usize; rank];
    let mut src_off = 0usize;
    for item in out.iter_mut() {
        *item = src[src_off];
        for ax in (0..rank).rev() {
            idx[ax] += 1;
            src_off += mapped[ax];
            if idx[ax] < out_shape[ax] {
                break;
            }
            idx[ax] = 0;
            src_off -= mapped[ax] * out_shape[ax];
        }
    }
    (out_shape, out)
}

fn invert_perm(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

struct ReshapeBack;

impl<T: Real> Backward<T> for ReshapeBack {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>> {
        vec![ctx.out_grad.to_vec()]
    }
}

struct PermuteBack {
    perm: Vec<usize>,
}

impl<T: Real> Backward<T> for PermuteBack {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>> {
        let inv = invert_perm(&self.perm);
        let (_, g) = permute_copy(ctx.out_shape, &inv, ctx.out_grad);
        vec![g]
    }
}

struct SliceBack {
    ranges: Vec<(usize, usize)>,
}

impl<T: Real> Backward<T> for SliceBack {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>> {
        let (xsh, xv) = ctx.parents[0];
        let mut gx = vec![T::ZERO; xv.len()];
        let in_strides = strides(xsh);
        let rank = xsh.len();
        let mut idx = vec![0usize; rank];
        let mut base: usize = self
            .ranges
            .iter()
            .enumerate()
            .map(|(ax, &(s, _))| s * in_strides[ax])
            .sum();
        for &g in ctx.out_grad {
            gx[base] += g;
            for ax in (0..rank).rev() {
                idx[ax] += 1;
                base += in_strides[ax];
                if idx[ax] < ctx.out_shape[ax] {
                    break;
                }
                idx[ax] = 0;
                base -= in_strides[ax] * ctx.out_shape[ax];
            }
        }
        vec![gx]
    }
}

struct ConcatBack {
    axis: usize,
}

impl<T: Real> Backward<T> for ConcatBack {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>> {
        let outer: usize = ctx.out_shape[..self.axis].iter().product();
        let inner: usize = ctx.out_shape[self.axis + 1..].iter().product();
        let total_axis = ctx.out_shape[self.axis];
        let mut grads = Vec::with_capacity(ctx.parents.len());
        let mut offset = 0;
        for &(psh, pv) in &ctx.parents {
            let part = psh[self.axis];
            let mut g = vec![T::ZERO; pv.len()];
            for o in 0..outer {
                let src = (o * total_axis + offset) * inner;
                let dst = o * part * inner;
                g[dst..dst + part * inner]
                    .copy_from_slice(&ctx.out_grad[src..src + part * inner]);
            }
            offset += part;
            grads.push(g);
        }
        grads
    }
}

struct IndexSelectBack {
    indices: Vec<usize>,
    n_rows: usize,
}

impl<T: Real> Backward<T> for IndexSelectBack {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>> {
        let (_, xv) = ctx.parents[0];
        let row = xv.len() / self.n_rows;
        let mut gx = vec![T::ZERO; xv.len()];
        for (r, &i) in self.indices.iter().enumerate() {
            let src = &ctx.out_grad[r * row..(r + 1) * row];
            let dst = &mut gx[i * row..(i + 1) * row];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
        vec![gx]
    }
}

struct Upsample2xBack;

impl<T: Real> Backward<T> for Upsample2xBack {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>> {
        let (xsh, xv) = ctx.parents[0];
        let (h, w) = (xsh[2], xsh[3]);
        let planes = xsh[0] * xsh[1];
        let mut gx = vec![T::ZERO; xv.len()];
        for p in 0..planes {
            let g = &ctx.out_grad[p * 4 * h * w..(p + 1) * 4 * h * w];
            let gp = &mut gx[p * h * w..(p + 1) * h * w];
            for y in 0..2 * h {
                for x in 0..2 * w {
                    gp[(y / 2) * w + x / 2] += g[y * 2 * w + x];
                }
            }
        }
        vec![gx]
    }
}

impl<T: Real> Tape<T> {
    pub fn reshape(&mut self, x: VarId, shape: impl Into<Shape>) -> Result<VarId> {
        let shape = shape.into();
        let xsh = self.shape(x);
        if numel(&shape) != numel(xsh) {
            return Err(TapeError::ShapeMismatch {
                op: "reshape",
                lhs: fmt_shape(xsh),
                rhs: fmt_shape(&shape),
            });
        }
        let vals = self.values(x).to_vec();
        self.push("reshape", shape, vals, vec![x], Box::new(ReshapeBack))
    }

    pub fn permute(&mut self, x: VarId, perm: &[usize]) -> Result<VarId> {
        let xsh = self.shape(x).to_vec();
        let mut seen = vec![false; xsh.len()];
        if perm.len() != xsh.len() || perm.iter().any(|&p| p >= xsh.len() || std::mem::replace(&mut seen[p], true)) {
            return Err(TapeError::InvalidArg {
                op: "permute",
                msg: format!("perm {perm:?} not a permutation of rank {}", xsh.len()),
            });
        }
        let (out_shape, out) = permute_copy(&xsh, perm, self.values(x));
        self.push("permute", out_shape, out, vec![x], Box::new(PermuteBack { perm: perm.to_vec() }))
    }

    /// (m,n) -> (n,m)
    pub fn transpose(&mut self, x: VarId) -> Result<VarId> {
        self.permute(x, &[1, 0])
    }

    /// One (start, end) half-open range per axis.
    pub fn slice(&mut self, x: VarId, ranges: &[(usize, usize)]) -> Result<VarId> {
        let xsh = self.shape(x).to_vec();
        if ranges.len() != xsh.len()
            || ranges.iter().zip(&xsh).any(|(&(s, e), &d)| s > e || e > d)
        {
            return Err(TapeError::InvalidArg {
                op: "slice",
                msg: format!("ranges {ranges:?} invalid for shape {}", fmt_shape(&xsh)),
            });
        }
        let out_shape: Shape = ranges.iter().map(|&(s, e)| e - s).collect();
        let n = numel(&out_shape);
        let in_strides = strides(&xsh);
        let rank = xsh.len();
        let xv = self.values(x);
        let mut out = vec![T::ZERO; n];
        let mut idx = vec![0usize; rank];
        let mut base: usize =
            ranges.iter().enumerate().map(|(ax, &(s, _))| s * in_strides[ax]).sum();
        for item in out.iter_mut() {
            *item = xv[base];
            for ax in (0..rank).rev() {
                idx[ax] += 1;
                base += in_strides[ax];
                if idx[ax] < out_shape[ax] {
                    break;
                }
                idx[ax] = 0;
                base -= in_strides[ax] * out_shape[ax];
            }
        }
        self.push(
            "slice",
            out_shape,
            out,
            vec![x],
            Box::new(SliceBack { ranges: ranges.to_vec() }),
        )
    }

    pub fn concat(&mut self, xs: &[VarId], axis: usize) -> Result<VarId> {
        if xs.is_empty() {
            return Err(TapeError::InvalidArg { op: "concat", msg: "no inputs".into() });
        }
        let first = self.shape(xs[0]).to_vec();
        if axis >= first.len() {
            return Err(TapeError::InvalidArg {
                op: "concat",
                msg: format!("axis {axis} out of range for rank {}", first.len()),
            });
        }
        let mut axis_total = 0;
        for &x in xs {
            let sh = self.shape(x);
            let compatible = sh.len() == first.len()
                && sh.iter().zip(&first).enumerate().all(|(ax, (&a, &b))| ax == axis || a == b);
            if !compatible {
                return Err(TapeError::ShapeMismatch {
                    op: "concat",
                    lhs: fmt_shape(&first),
                    rhs: fmt_shape(sh),
                });
            }
            axis_total += sh[axis];
        }
        let mut out_shape = first.clone();
        out_shape[axis] = axis_total;
        let outer: usize = first[..axis].iter().product();
        let inner: usize = first[axis + 1..].iter().product();
        let mut out = vec![T::ZERO; numel(&out_shape)];
        let mut offset = 0;
        for &x in xs {
            let part = self.shape(x)[axis];
            let xv = self.values(x);
            for o in 0..outer {
                let dst = (o * axis_total + offset) * inner;
                let src = o * part * inner;
                out[dst..dst + part * inner].copy_from_slice(&xv[src..src + part * inner]);
            }
            offset += part;
        }
        self.push("concat", out_shape, out, xs.to_vec(), Box::new(ConcatBack { axis }))
    }

    /// Select rows along axis 0; duplicate indices accumulate gradient.
    pub fn index_select(&mut self, x: VarId, indices: &[usize]) -> Result<VarId> {
        let xsh = self.shape(x).to_vec();
        if xsh.is_empty() {
            return Err(TapeError::InvalidArg { op: "index_select", msg: "rank-0 input".into() });
        }
        let n_rows = xsh[0];
        if let Some(&bad) = indices.iter().find(|&&i| i >= n_rows) {
            return Err(TapeError::InvalidArg {
                op: "index_select",
                msg: format!("index {bad} out of range for {n_rows} rows"),
            });
        }
        let row: usize = xsh[1..].iter().product();
        let mut out_shape = xsh.clone();
        out_shape[0] = indices.len();
        let xv = self.values(x);
        let mut out = vec![T::ZERO; indices.len() * row];
        for (r, &i) in indices.iter().enumerate() {
            out[r * row..(r + 1) * row].copy_from_slice(&xv[i * row..(i + 1) * row]);
        }
        self.push(
            "index_select",
            out_shape,
            out,
            vec![x],
            Box::new(IndexSelectBack { indices: indices.to_vec(), n_rows }),
        )
    }

    /// Nearest-neighbor x2 upsampling of (B,C,H,W).
    pub fn upsample2x(&mut self, x: VarId) -> Result<VarId> {
        let xsh = self.shape(x).to_vec();
        if xsh.len() != 4 {
            return Err(TapeError::InvalidArg {
                op: "upsample2x",
                msg: format!("expected rank 4, got {}", fmt_shape(&xsh)),
            });
        }
        let (h, w) = (xsh[2], xsh[3]);
        let planes = xsh[0] * xsh[1];
        let xv = self.values(x);
        let mut out = vec![T::ZERO; planes * 4 * h * w];
        for p in 0..planes {
            let src = &xv[p * h * w..(p + 1) * h * w];
            let dst = &mut out[p * 4 * h * w..(p + 1) * 4 * h * w];
            for y in 0..2 * h {
                let srow = &src[(y / 2) * w..(y / 2 + 1) * w];
                let drow = &mut dst[y * 2 * w..(y + 1) * 2 * w];
                for x_ in 0..2 * w {
                    drow[x_] = srow[x_ / 2];
                }
            }
        }
        self.push(
            "upsample2x",
            vec![xsh[0], xsh[1], 2 * h, 2 * w],
            out,
            vec![x],
            Box::new(Upsample2xBack),
        )
    }
}
