//! Elementwise binary ops with NumPy-style broadcasting.

use crate::error::{Result, TapeError};
use crate::real::Real;
use crate::shape::{broadcast_shape, broadcast_walk, fmt_shape, numel};
use crate::tape::{Backward, Ctx, Tape, VarId};

#[derive(Copy, Clone)]
enum Bin {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
}

impl Bin {
    fn name(self) -> &'static str {
        match self {
            Bin::Add => "add",
            Bin::Sub => "sub",
            Bin::Mul => "mul",
            Bin::Div => "div",
            Bin::Min => "minimum",
            Bin::Max => "maximum",
        }
    }

    fn f<T: Real>(self, a: T, b: T) -> T {
        match self {
            Bin::Add => a + b,
            Bin::Sub => a - b,
            Bin::Mul => a * b,
            Bin::Div => a / b,
            Bin::Min => a.minv(b),
            Bin::Max => a.maxv(b),
        }
    }
}

struct BinBack {
    kind: Bin,
}

impl<T: Real> Backward<T> for BinBack {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>> {
        let (ash, a) = ctx.parents[0];
        let (bsh, b) = ctx.parents[1];
        let mut ga = vec![T::ZERO; a.len()];
        let mut gb = vec![T::ZERO; b.len()];
        let kind = self.kind;
        broadcast_walk(ctx.out_shape, ash, bsh, |o, ia, ib| {
            let g = ctx.out_grad[o];
            match kind {
                Bin::Add => {
                    ga[ia] += g;
                    gb[ib] += g;
                }
                Bin::Sub => {
                    ga[ia] += g;
                    gb[ib] -= g;
                }
                Bin::Mul => {
                    ga[ia] += g * b[ib];
                    gb[ib] += g * a[ia];
                }
                Bin::Div => {
                    let inv = T::ONE / b[ib];
                    ga[ia] += g * inv;
                    gb[ib] -= g * a[ia] * inv * inv;
                }
                // Ties route to the left operand; callers keep check points
                // away from the kink.
                Bin::Min => {
                    if a[ia] <= b[ib] {
                        ga[ia] += g;
                    } else {
                        gb[ib] += g;
                    }
                }
                Bin::Max => {
                    if a[ia] >= b[ib] {
                        ga[ia] += g;
                    } else {
                        gb[ib] += g;
                    }
                }
            }
        });
        vec![ga, gb]
    }
}

impl<T: Real> Tape<T> {
    fn binary(&mut self, kind: Bin, a: VarId, b: VarId) -> Result<VarId> {
        let ash = self.shape(a).to_vec();
        let bsh = self.shape(b).to_vec();
        let out_shape = broadcast_shape(&ash, &bsh).ok_or_else(|| TapeError::ShapeMismatch {
            op: kind.name(),
            lhs: fmt_shape(&ash),
            rhs: fmt_shape(&bsh),
        })?;
        let mut out = vec![T::ZERO; numel(&out_shape)];
        if ash == bsh {
            // fast path: both operands contiguous and aligned
            let (av, bv) = (self.values(a), self.values(b));
            for ((o, &x), &y) in out.iter_mut().zip(av).zip(bv) {
                *o = kind.f(x, y);
            }
        } else {
            let (av, bv) = (self.values(a), self.values(b));
            broadcast_walk(&out_shape, &ash, &bsh, |o, ia, ib| {
                out[o] = kind.f(av[ia], bv[ib]);
            });
        }
        self.push(kind.name(), out_shape, out, vec![a, b], Box::new(BinBack { kind }))
    }

    pub fn add(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.binary(Bin::Add, a, b)
    }

    pub fn sub(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.binary(Bin::Sub, a, b)
    }

    pub fn mul(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.binary(Bin::Mul, a, b)
    }

    pub fn div(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.binary(Bin::Div, a, b)
    }

    pub fn minimum(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.binary(Bin::Min, a, b)
    }

    pub fn maximum(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.binary(Bin::Max, a, b)
    }
}
