//! Finite-difference verification. The reference derivative is always
//! central differences in f64; the same graph-building closure is
//! instantiated at f32 and f64 so both precision lanes are checked against
//! that one reference.

use crate::error::Result;
use crate::real::Real;
use crate::tape::{Tape, VarId};
use crate::tensor::Tensor;

/// Graph-building closure at one precision: takes the tape and the leaf ids,
/// returns the scalar loss id.
pub type GraphFn<'a, T> = Box<dyn Fn(&mut Tape<T>, &[VarId]) -> Result<VarId> + 'a>;

/// One graph-building function at both precisions. Construct with the
/// `dual_fn!` macro so the body is written once.
pub struct DualFn<'a> {
    pub f32_fn: GraphFn<'a, f32>,
    pub f64_fn: GraphFn<'a, f64>,
}

/// Expands one generic closure body at f32 and f64.
#[macro_export]
macro_rules! dual_fn {
    (|$g:ident, $xs:ident| $body:expr) => {
        $crate::gradcheck::DualFn {
            f32_fn: Box::new(|$g: &mut $crate::Tape<f32>, $xs: &[$crate::VarId]| $body),
            f64_fn: Box::new(|$g: &mut $crate::Tape<f64>, $xs: &[$crate::VarId]| $body),
        }
    };
}

#[derive(Debug, Clone, Copy)]
pub struct GradCheckReport {
    pub max_rel_f32: f64,
    pub max_rel_f64: f64,
    pub checked_elems: usize,
}

/// Relative error with a floor: behaves like absolute error for tiny
/// gradients and relative error for O(1) ones.
fn rel_err(a: f64, fd: f64) -> f64 {
    (a - fd).abs() / a.abs().max(fd.abs()).max(0.1)
}

fn eval<T: Real>(
    f: &GraphFn<'_, T>,
    inputs: &[Tensor<T>],
) -> Result<(f64, Vec<Option<Vec<f64>>>)> {
    let mut tape = Tape::new();
    let ids: Vec<VarId> = inputs.iter().map(|t| tape.leaf(t)).collect();
    let loss = f(&mut tape, &ids)?;
    tape.backward(loss)?;
    let grads = ids
        .iter()
        .map(|&id| tape.grad(id).map(|g| g.iter().map(|v| v.to_f64()).collect()))
        .collect();
    Ok((tape.values(loss)[0].to_f64(), grads))
}

fn eval_value<T: Real>(f: &GraphFn<'_, T>, inputs: &[Tensor<T>]) -> Result<f64> {
    let mut tape = Tape::new();
    let ids: Vec<VarId> = inputs.iter().map(|t| tape.leaf(t)).collect();
    let loss = f(&mut tape, &ids)?;
    Ok(tape.values(loss)[0].to_f64())
}

/// Compares analytic gradients (f64 and f32 lanes) of a scalar-valued graph
/// against f64 central finite differences. Inputs are master copies in f64;
/// only those with `requires_grad` are perturbed. Callers keep sampled points
/// away from kinks (relu/abs/min/max) by construction.
pub fn grad_check(f: &DualFn<'_>, inputs: &[Tensor<f64>], eps: f64) -> Result<GradCheckReport> {
    let (_, grads64) = eval(&f.f64_fn, inputs)?;
    let inputs32: Vec<Tensor<f32>> = inputs.iter().map(|t| t.to_f32()).collect();
    let (_, grads32) = eval(&f.f32_fn, &inputs32)?;

    let mut report = GradCheckReport { max_rel_f32: 0.0, max_rel_f64: 0.0, checked_elems: 0 };
    for (i, input) in inputs.iter().enumerate() {
        if !input.requires_grad {
            continue;
        }
        let g64 = grads64[i].as_ref().expect("f64 gradient missing for tracked input");
        let g32 = grads32[i].as_ref().expect("f32 gradient missing for tracked input");
        for e in 0..input.numel() {
            let mut plus = inputs.to_vec();
            plus[i].values_mut()[e] += eps;
            let lp = eval_value(&f.f64_fn, &plus)?;
            let mut minus = inputs.to_vec();
            minus[i].values_mut()[e] -= eps;
            let lm = eval_value(&f.f64_fn, &minus)?;
            let fd = (lp - lm) / (2.0 * eps);
            report.max_rel_f64 = report.max_rel_f64.max(rel_err(g64[e], fd));
            report.max_rel_f32 = report.max_rel_f32.max(rel_err(g32[e], fd));
            report.checked_elems += 1;
        }
    }
    Ok(report)
}

/// Panics with context when either precision lane exceeds its tolerance.
pub fn assert_grad_check(
    name: &str,
    f: &DualFn<'_>,
    inputs: &[Tensor<f64>],
    eps: f64,
    tol32: f64,
    tol64: f64,
) {
    let report = grad_check(f, inputs, eps)
        .unwrap_or_else(|e| panic!("grad check '{name}' failed to evaluate: {e}"));
    assert!(report.checked_elems > 0, "grad check '{name}' checked no elements");
    assert!(
        report.max_rel_f64 < tol64,
        "grad check '{name}': f64 rel err {} >= {tol64}",
        report.max_rel_f64
    );
    assert!(
        report.max_rel_f32 < tol32,
        "grad check '{name}': f32 rel err {} >= {tol32}",
        report.max_rel_f32
    );
}
