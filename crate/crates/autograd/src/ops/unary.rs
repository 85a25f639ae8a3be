//! Elementwise unary ops. `affine` covers scaling/negation/shifting by
//! constants; `power` takes a constant exponent.

use crate::error::{Result, TapeError};
use crate::real::{c, Real};
use crate::tape::{Backward, Ctx, Tape, VarId};

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044_715;

#[derive(Copy, Clone)]
enum Unary {
    Relu,
    Abs,
    Sigmoid,
    LogSigmoid,
    Exp,
    Log,
    Tanh,
    Gelu,
    Sqrt,
    Power(f64),
    Affine(f64, f64),
}

fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::ZERO {
        T::ONE / (T::ONE + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::ONE + e)
    }
}

fn softplus<T: Real>(x: T) -> T {
    x.maxv(T::ZERO) + (-x.abs()).exp().ln_1p()
}

impl Unary {
    fn name(self) -> &'static str {
        match self {
            Unary::Relu => "relu",
            Unary::Abs => "abs",
            Unary::Sigmoid => "sigmoid",
            Unary::LogSigmoid => "log_sigmoid",
            Unary::Exp => "exp",
            Unary::Log => "log",
            Unary::Tanh => "tanh",
            Unary::Gelu => "gelu",
            Unary::Sqrt => "sqrt",
            Unary::Power(_) => "power",
            Unary::Affine(_, _) => "affine",
        }
    }

    fn f<T: Real>(self, x: T) -> T {
        match self {
            Unary::Relu => x.maxv(T::ZERO),
            Unary::Abs => x.abs(),
            Unary::Sigmoid => sigmoid(x),
            Unary::LogSigmoid => -softplus(-x),
            Unary::Exp => x.exp(),
            Unary::Log => x.ln(),
            Unary::Tanh => x.tanh(),
            Unary::Gelu => {
                let u = c::<T>(GELU_C) * (x + c::<T>(GELU_A) * x * x * x);
                c::<T>(0.5) * x * (T::ONE + u.tanh())
            }
            Unary::Sqrt => x.sqrt(),
            Unary::Power(p) => x.powf(c(p)),
            Unary::Affine(a, b) => c::<T>(a) * x + c::<T>(b),
        }
    }

    /// dy/dx given input x and output y.
    fn df<T: Real>(self, x: T, y: T) -> T {
        match self {
            Unary::Relu => {
                if x > T::ZERO {
                    T::ONE
                } else {
                    T::ZERO
                }
            }
            Unary::Abs => {
                if x > T::ZERO {
                    T::ONE
                } else if x < T::ZERO {
                    -T::ONE
                } else {
                    T::ZERO
                }
            }
            Unary::Sigmoid => y * (T::ONE - y),
            Unary::LogSigmoid => sigmoid(-x),
            Unary::Exp => y,
            Unary::Log => T::ONE / x,
            Unary::Tanh => T::ONE - y * y,
            Unary::Gelu => {
                let x3 = x * x * x;
                let u = c::<T>(GELU_C) * (x + c::<T>(GELU_A) * x3);
                let t = u.tanh();
                let du = c::<T>(GELU_C) * (T::ONE + c::<T>(3.0 * GELU_A) * x * x);
                c::<T>(0.5) * (T::ONE + t) + c::<T>(0.5) * x * (T::ONE - t * t) * du
            }
            Unary::Sqrt => c::<T>(0.5) / y,
            Unary::Power(p) => c::<T>(p) * x.powf(c(p - 1.0)),
            Unary::Affine(a, _) => c(a),
        }
    }
}

struct UnaryBack {
    kind: Unary,
}

impl<T: Real> Backward<T> for UnaryBack {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>> {
        let (_, x) = ctx.parents[0];
        let gx = x
            .iter()
            .zip(ctx.out)
            .zip(ctx.out_grad)
            .map(|((&xi, &yi), &gi)| gi * self.kind.df(xi, yi))
            .collect();
        vec![gx]
    }
}

impl<T: Real> Tape<T> {
    fn unary(&mut self, kind: Unary, x: VarId) -> Result<VarId> {
        let shape = self.shape(x).to_vec();
        let out = self.values(x).iter().map(|&v| kind.f(v)).collect();
        self.push(kind.name(), shape, out, vec![x], Box::new(UnaryBack { kind }))
    }

    pub fn relu(&mut self, x: VarId) -> Result<VarId> {
        self.unary(Unary::Relu, x)
    }

    pub fn abs(&mut self, x: VarId) -> Result<VarId> {
        self.unary(Unary::Abs, x)
    }

    pub fn sigmoid(&mut self, x: VarId) -> Result<VarId> {
        self.unary(Unary::Sigmoid, x)
    }

    pub fn log_sigmoid(&mut self, x: VarId) -> Result<VarId> {
        self.unary(Unary::LogSigmoid, x)
    }

    pub fn exp(&mut self, x: VarId) -> Result<VarId> {
        self.unary(Unary::Exp, x)
    }

    pub fn log(&mut self, x: VarId) -> Result<VarId> {
        self.unary(Unary::Log, x)
    }

    pub fn tanh(&mut self, x: VarId) -> Result<VarId> {
        self.unary(Unary::Tanh, x)
    }

    pub fn gelu(&mut self, x: VarId) -> Result<VarId> {
        self.unary(Unary::Gelu, x)
    }

    pub fn sqrt(&mut self, x: VarId) -> Result<VarId> {
        self.unary(Unary::Sqrt, x)
    }

    /// x^p for constant p. Fractional p requires non-negative inputs (checked
    /// mode turns NaN into an error).
    pub fn power(&mut self, x: VarId, p: f64) -> Result<VarId> {
        if !p.is_finite() {
            return Err(TapeError::InvalidArg { op: "power", msg: format!("exponent {p}") });
        }
        self.unary(Unary::Power(p), x)
    }

    /// a*x + b with constant a, b.
    pub fn affine(&mut self, x: VarId, a: f64, b: f64) -> Result<VarId> {
        self.unary(Unary::Affine(a, b), x)
    }

    pub fn neg(&mut self, x: VarId) -> Result<VarId> {
        self.affine(x, -1.0, 0.0)
    }
}
