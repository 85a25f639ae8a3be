//! 2-D and batched matrix multiplication. Kernels use an i-k-j loop order so
//! the inner loop runs over contiguous rows and vectorizes.

use crate::error::{Result, TapeError};
use crate::real::Real;
use crate::shape::fmt_shape;
use crate::tape::{Backward, Ctx, Tape, VarId};

/// out += a(m,k) * b(k,n); out must hold m*n zeros (or a partial sum).
pub(crate) fn mm<T: Real>(a: &[T], b: &[T], m: usize, k: usize, n: usize, out: &mut [T]) {
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let orow = &mut out[i * n..(i + 1) * n];
        for (kk, &av) in arow.iter().enumerate() {
            let brow = &b[kk * n..(kk + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
}

/// out += a(m,k) * b(n,k)^T -> (m,n); rows of both operands are contiguous.
pub(crate) fn mm_nt<T: Real>(a: &[T], b: &[T], m: usize, k: usize, n: usize, out: &mut [T]) {
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let orow = &mut out[i * n..(i + 1) * n];
        for (j, o) in orow.iter_mut().enumerate() {
            let brow = &b[j * k..(j + 1) * k];
            let mut acc = T::ZERO;
            for (&x, &y) in arow.iter().zip(brow) {
                acc += x * y;
            }
            *o += acc;
        }
    }
}

/// out += a(k,m)^T * b(k,n) -> (m,n).
pub(crate) fn mm_tn<T: Real>(a: &[T], b: &[T], m: usize, k: usize, n: usize, out: &mut [T]) {
    for kk in 0..k {
        let arow = &a[kk * m..(kk + 1) * m];
        let brow = &b[kk * n..(kk + 1) * n];
        for (i, &av) in arow.iter().enumerate() {
            let orow = &mut out[i * n..(i + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
}

struct MatmulBack;

impl<T: Real> Backward<T> for MatmulBack {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>> {
        let (ash, a) = ctx.parents[0];
        let (bsh, b) = ctx.parents[1];
        let (m, k, n) = (ash[0], ash[1], bsh[1]);
        let mut ga = vec![T::ZERO; m * k];
        let mut gb = vec![T::ZERO; k * n];
        mm_nt(ctx.out_grad, b, m, n, k, &mut ga); // dA = g * B^T
        mm_tn(a, ctx.out_grad, k, m, n, &mut gb); // dB = A^T * g
        vec![ga, gb]
    }
}

struct BmmBack;

impl<T: Real> Backward<T> for BmmBack {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>> {
        let (ash, a) = ctx.parents[0];
        let (bsh, b) = ctx.parents[1];
        let (bt, m, k, n) = (ash[0], ash[1], ash[2], bsh[2]);
        let mut ga = vec![T::ZERO; bt * m * k];
        let mut gb = vec![T::ZERO; bt * k * n];
        for t in 0..bt {
            let g = &ctx.out_grad[t * m * n..(t + 1) * m * n];
            mm_nt(g, &b[t * k * n..(t + 1) * k * n], m, n, k, &mut ga[t * m * k..(t + 1) * m * k]);
            mm_tn(&a[t * m * k..(t + 1) * m * k], g, k, m, n, &mut gb[t * k * n..(t + 1) * k * n]);
        }
        vec![ga, gb]
    }
}

impl<T: Real> Tape<T> {
    /// (m,k) x (k,n) -> (m,n)
    pub fn matmul(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        let ash = self.shape(a).to_vec();
        let bsh = self.shape(b).to_vec();
        if ash.len() != 2 || bsh.len() != 2 || ash[1] != bsh[0] {
            return Err(TapeError::ShapeMismatch {
                op: "matmul",
                lhs: fmt_shape(&ash),
                rhs: fmt_shape(&bsh),
            });
        }
        let (m, k, n) = (ash[0], ash[1], bsh[1]);
        let mut out = vec![T::ZERO; m * n];
        mm(self.values(a), self.values(b), m, k, n, &mut out);
        self.push("matmul", vec![m, n], out, vec![a, b], Box::new(MatmulBack))
    }

    /// (B,m,k) x (B,k,n) -> (B,m,n)
    pub fn bmm(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        let ash = self.shape(a).to_vec();
        let bsh = self.shape(b).to_vec();
        if ash.len() != 3 || bsh.len() != 3 || ash[0] != bsh[0] || ash[2] != bsh[1] {
            return Err(TapeError::ShapeMismatch {
                op: "bmm",
                lhs: fmt_shape(&ash),
                rhs: fmt_shape(&bsh),
            });
        }
        let (bt, m, k, n) = (ash[0], ash[1], ash[2], bsh[2]);
        let mut out = vec![T::ZERO; bt * m * n];
        for t in 0..bt {
            mm(
                &self.values(a)[t * m * k..(t + 1) * m * k],
                &self.values(b)[t * k * n..(t + 1) * k * n],
                m,
                k,
                n,
                &mut out[t * m * n..(t + 1) * m * n],
            );
        }
        self.push("bmm", vec![bt, m, n], out, vec![a, b], Box::new(BmmBack))
    }
}
