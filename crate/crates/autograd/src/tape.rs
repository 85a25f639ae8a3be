//! Reverse-mode tape. Each operation appends a node holding the forward
//! values plus a backward rule; `backward` replays the tape in reverse and
//! accumulates gradients per node. The tape owns all graph data, so a fresh
//! tape per training step keeps parameters (host `Tensor`s) and graph state
//! cleanly separated.

use crate::error::{Result, TapeError};
use crate::real::Real;
use crate::shape::{fmt_shape, numel, Shape};
use crate::tensor::Tensor;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarId(pub(crate) usize);

/// Context handed to a backward rule: the node's upstream gradient, its own
/// forward values, and each parent's (shape, values).
pub(crate) struct Ctx<'a, T> {
    pub out_grad: &'a [T],
    pub out: &'a [T],
    pub out_shape: &'a [usize],
    pub parents: Vec<(&'a [usize], &'a [T])>,
}

/// A backward rule returns one gradient contribution per parent, each shaped
/// like that parent. Contributions are accumulated by the engine, which keeps
/// rules oblivious to duplicated parents (e.g. `mul(x, x)`).
pub(crate) trait Backward<T: Real> {
    fn grads(&self, ctx: &Ctx<'_, T>) -> Vec<Vec<T>>;
}

pub(crate) struct Node<T: Real> {
    pub shape: Shape,
    pub values: Vec<T>,
    pub requires_grad: bool,
    pub parents: Vec<VarId>,
    pub back: Option<Box<dyn Backward<T>>>,
}

pub struct Tape<T: Real> {
    pub(crate) nodes: Vec<Node<T>>,
    grads: Vec<Option<Vec<T>>>,
    checked: bool,
}

impl<T: Real> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Tape<T> {
    /// Checked mode is always on: any op producing NaN/Inf fails fast. The
    /// scan is linear and cheap next to the matmuls it guards.
    pub fn new() -> Self {
        Tape { nodes: Vec::new(), grads: Vec::new(), checked: true }
    }

    pub fn unchecked() -> Self {
        Tape { nodes: Vec::new(), grads: Vec::new(), checked: false }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Registers a leaf (copies the tensor's values). Gradients accumulate
    /// here when `requires_grad` is set on the tensor.
    pub fn leaf(&mut self, t: &Tensor<T>) -> VarId {
        let id = VarId(self.nodes.len());
        self.nodes.push(Node {
            shape: t.shape().to_vec(),
            values: t.values().to_vec(),
            requires_grad: t.requires_grad,
            parents: Vec::new(),
            back: None,
        });
        id
    }

    /// Constant node: never tracked.
    pub fn constant(&mut self, shape: impl Into<Shape>, values: Vec<T>) -> VarId {
        let shape = shape.into();
        assert_eq!(numel(&shape), values.len(), "constant shape/value mismatch");
        let id = VarId(self.nodes.len());
        self.nodes.push(Node { shape, values, requires_grad: false, parents: Vec::new(), back: None });
        id
    }

    pub fn scalar(&mut self, v: f64) -> VarId {
        self.constant(vec![], vec![T::from_f64(v)])
    }

    /// Constant node from f64 host data; lets code written once for both
    /// precision lanes feed in reference values.
    pub fn constant_f64(&mut self, shape: impl Into<Shape>, values: &[f64]) -> VarId {
        self.constant(shape.into(), values.iter().map(|&v| T::from_f64(v)).collect())
    }

    pub(crate) fn push(
        &mut self,
        op: &'static str,
        shape: Shape,
        values: Vec<T>,
        parents: Vec<VarId>,
        back: Box<dyn Backward<T>>,
    ) -> Result<VarId> {
        debug_assert_eq!(numel(&shape), values.len(), "{op}: shape/value mismatch");
        if self.checked && values.iter().any(|v| !v.is_finite()) {
            return Err(TapeError::NonFinite { op });
        }
        let requires_grad = parents.iter().any(|p| self.nodes[p.0].requires_grad);
        let id = VarId(self.nodes.len());
        self.nodes.push(Node {
            shape,
            values,
            requires_grad,
            parents,
            back: if requires_grad { Some(back) } else { None },
        });
        Ok(id)
    }

    pub fn shape(&self, id: VarId) -> &[usize] {
        &self.nodes[id.0].shape
    }

    pub fn values(&self, id: VarId) -> &[T] {
        &self.nodes[id.0].values
    }

    pub fn to_tensor(&self, id: VarId) -> Tensor<T> {
        Tensor::from_vec(self.nodes[id.0].shape.clone(), self.nodes[id.0].values.clone())
    }

    /// Gradient of the last `backward` call w.r.t. this node, if any reached it.
    pub fn grad(&self, id: VarId) -> Option<&[T]> {
        self.grads.get(id.0).and_then(|g| g.as_deref())
    }

    /// Reverse pass from a scalar loss. Replaces any gradients from a
    /// previous call on this tape.
    pub fn backward(&mut self, loss: VarId) -> Result<()> {
        let node = &self.nodes[loss.0];
        if numel(&node.shape) != 1 {
            return Err(TapeError::LossNotScalar(fmt_shape(&node.shape)));
        }
        if !node.requires_grad {
            return Err(TapeError::LossDetached);
        }
        self.grads = (0..self.nodes.len()).map(|_| None).collect();
        self.grads[loss.0] = Some(vec![T::ONE]);
        for i in (0..=loss.0).rev() {
            if self.nodes[i].back.is_none() {
                continue;
            }
            let Some(g) = self.grads[i].take() else { continue };
            let node = &self.nodes[i];
            let parents: Vec<(&[usize], &[T])> = node
                .parents
                .iter()
                .map(|p| {
                    let pn = &self.nodes[p.0];
                    (pn.shape.as_slice(), pn.values.as_slice())
                })
                .collect();
            let ctx = Ctx { out_grad: &g, out: &node.values, out_shape: &node.shape, parents };
            let contribs = node.back.as_ref().unwrap().grads(&ctx);
            debug_assert_eq!(contribs.len(), node.parents.len());
            let parent_ids: Vec<usize> = node.parents.iter().map(|p| p.0).collect();
            for (&pid, contrib) in parent_ids.iter().zip(contribs) {
                if !self.nodes[pid].requires_grad {
                    continue;
                }
                debug_assert_eq!(contrib.len(), self.nodes[pid].values.len());
                let len = self.nodes[pid].values.len();
                let acc = self.grads[pid].get_or_insert_with(|| vec![T::ZERO; len]);
                for (a, c) in acc.iter_mut().zip(contrib) {
                    *a += c;
                }
            }
            self.grads[i] = Some(g);
        }
        Ok(())
    }
}
