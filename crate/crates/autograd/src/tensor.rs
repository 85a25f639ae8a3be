use crate::real::Real;
use crate::rng::Rng;
use crate::shape::{fmt_shape, numel, Shape};

/// Host-side tensor: row-major values plus shape. Used for parameters, data
/// batches and results; tape nodes hold their own copies during a forward.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    shape: Shape,
    values: Vec<T>,
    pub requires_grad: bool,
    pub grad: Option<Vec<T>>,
}

impl<T: Real> Tensor<T> {
    pub fn from_vec(shape: impl Into<Shape>, values: Vec<T>) -> Self {
        let shape = shape.into();
        assert_eq!(
            numel(&shape),
            values.len(),
            "tensor shape {} does not match {} values",
            fmt_shape(&shape),
            values.len()
        );
        Tensor { shape, values, requires_grad: false, grad: None }
    }

    pub fn scalar(v: T) -> Self {
        Tensor::from_vec(vec![], vec![v])
    }

    pub fn zeros(shape: impl Into<Shape>) -> Self {
        let shape = shape.into();
        let n = numel(&shape);
        Tensor { shape, values: vec![T::ZERO; n], requires_grad: false, grad: None }
    }

    pub fn full(shape: impl Into<Shape>, v: T) -> Self {
        let shape = shape.into();
        let n = numel(&shape);
        Tensor { shape, values: vec![v; n], requires_grad: false, grad: None }
    }

    /// Uniform init in [lo, hi) from the given stream.
    pub fn uniform(shape: impl Into<Shape>, lo: f64, hi: f64, rng: &mut Rng) -> Self {
        let shape = shape.into();
        let n = numel(&shape);
        let values = (0..n).map(|_| T::from_f64(rng.range(lo, hi))).collect();
        Tensor { shape, values, requires_grad: false, grad: None }
    }

    pub fn requires_grad(mut self) -> Self {
        self.requires_grad = true;
        self
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn numel(&self) -> usize {
        self.values.len()
    }

    pub fn map<U: Real>(&self, f: impl Fn(T) -> U) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            requires_grad: self.requires_grad,
            grad: None,
        }
    }

    pub fn to_f64(&self) -> Tensor<f64> {
        self.map(|v| v.to_f64())
    }

    pub fn to_f32(&self) -> Tensor<f32> {
        self.map(|v| v.to_f64() as f32)
    }
}

/// Re-types an f64 host tensor into the lane's precision; lets code written
/// once for both precision lanes consume f64 reference data.
pub fn from_f64_tensor<T: Real>(t: &Tensor<f64>) -> Tensor<T> {
    t.map(T::from_f64)
}
