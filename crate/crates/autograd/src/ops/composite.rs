//! Composites built from primitive ops, so their gradients come from the
//! tape: cosine similarity between row sets, soft-label cross-entropy, binary
//! cross-entropy and the focal variant used by the detector.

use crate::error::{Result, TapeError};
use crate::real::Real;
use crate::tape::{Tape, VarId};
use crate::tensor::Tensor;

pub const COSINE_EPS: f64 = 1e-12;

impl<T: Real> Tape<T> {
    /// Pairwise cosine similarity between rows: (m,d) x (n,d) -> (m,n), or
    /// batched (B,m,d) x (B,n,d) -> (B,m,n).
    pub fn cosine_similarity(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        let ra = self.shape(a).len();
        let rb = self.shape(b).len();
        let an = self.l2_normalize_rows(a, COSINE_EPS)?;
        let bn = self.l2_normalize_rows(b, COSINE_EPS)?;
        match (ra, rb) {
            (2, 2) => {
                let bt = self.transpose(bn)?;
                self.matmul(an, bt)
            }
            (3, 3) => {
                let bt = self.permute(bn, &[0, 2, 1])?;
                self.bmm(an, bt)
            }
            _ => Err(TapeError::InvalidArg {
                op: "cosine_similarity",
                msg: format!("expected matching rank 2 or 3, got {ra} and {rb}"),
            }),
        }
    }

    /// Mean over rows of -sum(target * log_softmax(logits)). Targets are a
    /// constant distribution per row (soft labels allowed).
    pub fn cross_entropy_soft(&mut self, logits: VarId, targets: &Tensor<T>) -> Result<VarId> {
        if self.shape(logits) != targets.shape() {
            return Err(TapeError::ShapeMismatch {
                op: "cross_entropy_soft",
                lhs: crate::shape::fmt_shape(self.shape(logits)),
                rhs: crate::shape::fmt_shape(targets.shape()),
            });
        }
        let rows = if targets.shape().len() < 2 { 1 } else { targets.shape()[0] } as f64;
        let t = self.constant(targets.shape().to_vec(), targets.values().to_vec());
        let ls = self.log_softmax(logits)?;
        let prod = self.mul(t, ls)?;
        let s = self.sum_all(prod)?;
        self.affine(s, -1.0 / rows, 0.0)
    }

    /// Mean binary cross-entropy with logits against constant targets in [0,1].
    pub fn bce_with_logits(&mut self, logits: VarId, targets: &Tensor<T>) -> Result<VarId> {
        if self.shape(logits) != targets.shape() {
            return Err(TapeError::ShapeMismatch {
                op: "bce_with_logits",
                lhs: crate::shape::fmt_shape(self.shape(logits)),
                rhs: crate::shape::fmt_shape(targets.shape()),
            });
        }
        let n = targets.numel() as f64;
        let t = self.constant(targets.shape().to_vec(), targets.values().to_vec());
        let tc = targets.map(|v| T::ONE - v);
        let t1m = self.constant(tc.shape().to_vec(), tc.values().to_vec());
        let lp = self.log_sigmoid(logits)?;
        let nl = self.neg(logits)?;
        let ln = self.log_sigmoid(nl)?;
        let a = self.mul(t, lp)?;
        let b = self.mul(t1m, ln)?;
        let s0 = self.add(a, b)?;
        let s = self.sum_all(s0)?;
        self.affine(s, -1.0 / n, 0.0)
    }

    /// Sigmoid focal loss, summed over elements. Targets are constant 0/1.
    pub fn focal_bce_sum(
        &mut self,
        logits: VarId,
        targets: &Tensor<T>,
        alpha: f64,
        gamma: f64,
    ) -> Result<VarId> {
        if self.shape(logits) != targets.shape() {
            return Err(TapeError::ShapeMismatch {
                op: "focal_bce_sum",
                lhs: crate::shape::fmt_shape(self.shape(logits)),
                rhs: crate::shape::fmt_shape(targets.shape()),
            });
        }
        let t = self.constant(targets.shape().to_vec(), targets.values().to_vec());
        let t1m_host = targets.map(|v| T::ONE - v);
        let t1m = self.constant(t1m_host.shape().to_vec(), t1m_host.values().to_vec());
        let at_host = targets.map(|v| T::from_f64(alpha) * v + T::from_f64(1.0 - alpha) * (T::ONE - v));
        let at = self.constant(at_host.shape().to_vec(), at_host.values().to_vec());

        let p = self.sigmoid(logits)?;
        // p_t = t*p + (1-t)*(1-p); modulating factor (1 - p_t)^gamma
        let one = self.constant(targets.shape().to_vec(), vec![T::ONE; targets.numel()]);
        let p1m = self.sub(one, p)?;
        let pt_a = self.mul(t, p)?;
        let pt_b = self.mul(t1m, p1m)?;
        let pt = self.add(pt_a, pt_b)?;
        let one2 = self.constant(targets.shape().to_vec(), vec![T::ONE; targets.numel()]);
        let fac_base = self.sub(one2, pt)?;
        let fac = self.power(fac_base, gamma)?;
        // stable BCE via log-sigmoid
        let lp = self.log_sigmoid(logits)?;
        let nl = self.neg(logits)?;
        let ln = self.log_sigmoid(nl)?;
        let ce_a = self.mul(t, lp)?;
        let ce_b = self.mul(t1m, ln)?;
        let ce_sum = self.add(ce_a, ce_b)?;
        let ce = self.neg(ce_sum)?;
        let w = self.mul(at, fac)?;
        let l = self.mul(w, ce)?;
        self.sum_all(l)
    }
}
