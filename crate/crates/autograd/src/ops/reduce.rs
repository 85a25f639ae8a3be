//! Reductions: full and per-axis sums/means.

use crate::error::{Result, TapeError};
use crate::real::{c, Real};
use crate::shape::{numel, strides, Shape};
use crate::tape::{Backward, Ctx, Tape, VarId};

struct FullBack {
    scale: f64, // 1 for sum, 1/n for mean
}

impl<T: Real> Backward<T> for FullBack {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>> {
        let (_, xv) = ctx.parents[0];
        let g = ctx.out_grad[0] * c::<T>(self.scale);
        vec![vec![g; xv.len()]]
    }
}

/// Maps every input linear index to its output linear index when the axes in
/// `axes` are reduced away (or kept as size 1).
fn reduced_strides(in_shape: &[usize], axes: &[usize], keepdim: bool) -> (Shape, Vec<usize>) {
    let rank = in_shape.len();
    let mut out_shape = Vec::new();
    for (ax, &d) in in_shape.iter().enumerate() {
        if axes.contains(&ax) {
            if keepdim {
                out_shape.push(1);
            }
        } else {
            out_shape.push(d);
        }
    }
    let out_strides = strides(&out_shape);
    // stride of each input axis in the output
    let mut map = vec![0usize; rank];
    let mut oax = 0;
    for (ax, m) in map.iter_mut().enumerate() {
        if axes.contains(&ax) {
            if keepdim {
                oax += 1; // size-1 axis contributes stride 0 anyway
            }
        } else {
            *m = out_strides[oax];
            oax += 1;
        }
    }
    (out_shape, map)
}

struct AxesBack {
    axes: Vec<usize>,
    keepdim: bool,
    scale: f64,
}

impl<T: Real> Backward<T> for AxesBack {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>> {
        let (xsh, xv) = ctx.parents[0];
        let (_, map) = reduced_strides(xsh, &self.axes, self.keepdim);
        let scale = c::<T>(self.scale);
        let mut gx = vec![T::ZERO; xv.len()];
        walk(xsh, &map, |i, o| gx[i] = ctx.out_grad[o] * scale);
        vec![gx]
    }
}

/// Odometer walk pairing each input linear index with its reduced output index.
fn walk(in_shape: &[usize], map: &[usize], mut visit: impl FnMut(usize, usize)) {
    let n = numel(in_shape);
    let rank = in_shape.len();
    let mut idx = vec![0usize; rank];
    let mut o = 0usize;
    for i in 0..n {
        visit(i, o);
        for ax in (0..rank).rev() {
            idx[ax] += 1;
            o += map[ax];
            if idx[ax] < in_shape[ax] {
                break;
            }
            idx[ax] = 0;
            o -= map[ax] * in_shape[ax];
        }
    }
}

impl<T: Real> Tape<T> {
    /// Sum of all elements -> scalar (rank 0).
    pub fn sum_all(&mut self, x: VarId) -> Result<VarId> {
        let mut acc = T::ZERO;
        for &v in self.values(x) {
            acc += v;
        }
        self.push("sum_all", vec![], vec![acc], vec![x], Box::new(FullBack { scale: 1.0 }))
    }

    pub fn mean_all(&mut self, x: VarId) -> Result<VarId> {
        let n = self.values(x).len();
        if n == 0 {
            return Err(TapeError::InvalidArg { op: "mean_all", msg: "empty tensor".into() });
        }
        let mut acc = T::ZERO;
        for &v in self.values(x) {
            acc += v;
        }
        let scale = 1.0 / n as f64;
        self.push(
            "mean_all",
            vec![],
            vec![acc * c::<T>(scale)],
            vec![x],
            Box::new(FullBack { scale }),
        )
    }

    pub fn sum_axes(&mut self, x: VarId, axes: &[usize], keepdim: bool) -> Result<VarId> {
        self.reduce_axes("sum_axes", x, axes, keepdim, false)
    }

    pub fn mean_axes(&mut self, x: VarId, axes: &[usize], keepdim: bool) -> Result<VarId> {
        self.reduce_axes("mean_axes", x, axes, keepdim, true)
    }

    fn reduce_axes(
        &mut self,
        op: &'static str,
        x: VarId,
        axes: &[usize],
        keepdim: bool,
        mean: bool,
    ) -> Result<VarId> {
        let xsh = self.shape(x).to_vec();
        let mut seen = vec![false; xsh.len()];
        for &ax in axes {
            if ax >= xsh.len() || std::mem::replace(&mut seen[ax], true) {
                return Err(TapeError::InvalidArg {
                    op,
                    msg: format!("axes {axes:?} invalid for rank {}", xsh.len()),
                });
            }
        }
        let k: usize = axes.iter().map(|&ax| xsh[ax]).product();
        if k == 0 {
            return Err(TapeError::InvalidArg { op, msg: "reducing over empty axis".into() });
        }
        let (out_shape, map) = reduced_strides(&xsh, axes, keepdim);
        let xv = self.values(x);
        let mut out = vec![T::ZERO; numel(&out_shape)];
        walk(&xsh, &map, |i, o| out[o] += xv[i]);
        let scale = if mean { 1.0 / k as f64 } else { 1.0 };
        if mean {
            let s = c::<T>(scale);
            for v in out.iter_mut() {
                *v *= s;
            }
        }
        self.push(
            op,
            out_shape,
            out,
            vec![x],
            Box::new(AxesBack { axes: axes.to_vec(), keepdim, scale }),
        )
    }
}
