//! Named parameter sets, tape binding, and AdamW (decoupled weight decay;
//! weight decay 0 gives plain Adam).

use std::collections::HashMap;

use crate::real::{c, Real};
use crate::tape::{Tape, VarId};
use crate::tensor::Tensor;

/// Ordered name -> tensor map. Iteration order is insertion order, which
/// models keep stable so optimizer state, checkpoints and reruns line up.
pub struct Params<T: Real> {
    entries: Vec<(String, Tensor<T>)>,
    index: HashMap<String, usize>,
}

impl<T: Real> Default for Params<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Params<T> {
    pub fn new() -> Self {
        Params { entries: Vec::new(), index: HashMap::new() }
    }

    pub fn insert(&mut self, name: impl Into<String>, mut tensor: Tensor<T>) {
        let name = name.into();
        tensor.requires_grad = true;
        assert!(
            self.index.insert(name.clone(), self.entries.len()).is_none(),
            "duplicate parameter name {name}"
        );
        self.entries.push((name, tensor));
    }

    pub fn get(&self, name: &str) -> &Tensor<T> {
        let i = *self.index.get(name).unwrap_or_else(|| panic!("unknown parameter {name}"));
        &self.entries[i].1
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Tensor<T> {
        let i = *self.index.get(name).unwrap_or_else(|| panic!("unknown parameter {name}"));
        &mut self.entries[i].1
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn numel(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.numel()).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor<T>)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor<T>)> {
        self.entries.iter_mut().map(|(n, t)| (n.as_str(), t))
    }

    pub fn map_values<U: Real>(&self, f: impl Fn(T) -> U) -> Params<U> {
        let mut out = Params::new();
        for (n, t) in &self.entries {
            out.insert(n.clone(), t.map(&f));
        }
        out
    }
}

/// Leaf ids for one parameter set registered on one tape.
pub struct BoundParams {
    ids: Vec<VarId>,
    index: HashMap<String, usize>,
}

impl BoundParams {
    pub fn bind<T: Real>(params: &Params<T>, tape: &mut Tape<T>) -> Self {
        let mut ids = Vec::with_capacity(params.len());
        let mut index = HashMap::new();
        for (i, (name, tensor)) in params.entries.iter().enumerate() {
            ids.push(tape.leaf(tensor));
            index.insert(name.clone(), i);
        }
        BoundParams { ids, index }
    }

    pub fn id(&self, name: &str) -> VarId {
        let i = *self.index.get(name).unwrap_or_else(|| panic!("unbound parameter {name}"));
        self.ids[i]
    }

    /// Gradients in parameter order after a backward pass.
    pub fn grads<T: Real>(&self, tape: &Tape<T>) -> Vec<Option<Vec<T>>> {
        self.ids.iter().map(|&id| tape.grad(id).map(|g| g.to_vec())).collect()
    }
}

pub struct AdamW<T: Real> {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    step: u64,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Real> AdamW<T> {
    pub fn new(weight_decay: f64) -> Self {
        AdamW { beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay, step: 0, m: Vec::new(), v: Vec::new() }
    }

    /// Plain Adam: AdamW without the decoupled decay term.
    pub fn adam() -> Self {
        Self::new(0.0)
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// One update. Decoupled weight decay is applied to the parameter before
    /// the moment-based update; moments are bias-corrected.
    pub fn step(&mut self, params: &mut Params<T>, grads: &[Option<Vec<T>>], lr: f64) {
        assert_eq!(grads.len(), params.len(), "gradient count mismatch");
        if self.m.is_empty() {
            self.m = params.entries.iter().map(|(_, t)| vec![T::ZERO; t.numel()]).collect();
            self.v = self.m.clone();
        }
        self.step += 1;
        let t = self.step as i32;
        let b1 = c::<T>(self.beta1);
        let b2 = c::<T>(self.beta2);
        let one_b1 = c::<T>(1.0 - self.beta1);
        let one_b2 = c::<T>(1.0 - self.beta2);
        let bc1 = c::<T>(1.0 / (1.0 - self.beta1.powi(t)));
        let bc2 = c::<T>(1.0 / (1.0 - self.beta2.powi(t)));
        let lr_t = c::<T>(lr);
        let wd = c::<T>(lr * self.weight_decay);
        let eps = c::<T>(self.eps);
        for (i, (_, tensor)) in params.entries.iter_mut().enumerate() {
            let Some(g) = &grads[i] else { continue };
            let p = tensor.values_mut();
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            for j in 0..p.len() {
                p[j] -= wd * p[j];
                m[j] = b1 * m[j] + one_b1 * g[j];
                v[j] = b2 * v[j] + one_b2 * g[j] * g[j];
                let mh = m[j] * bc1;
                let vh = v[j] * bc2;
                p[j] -= lr_t * mh / (vh.sqrt() + eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_is_signed_lr() {
        // From zero state the bias corrections cancel: delta ~ -lr*sign(g).
        let mut params = Params::<f64>::new();
        params.insert("w", Tensor::from_vec(vec![3], vec![1.0, -2.0, 0.5]));
        let mut opt = AdamW::new(0.0);
        let g = vec![Some(vec![0.3, -0.7, 4.0])];
        opt.step(&mut params, &g, 0.01);
        let w = params.get("w").values();
        for (i, (&wi, w0)) in w.iter().zip([1.0, -2.0, 0.5]).enumerate() {
            let delta = wi - w0;
            let sign = [1.0, -1.0, 1.0][i];
            assert!((delta + 0.01 * sign).abs() < 1e-6, "delta {delta} at {i}");
        }
    }

    #[test]
    fn decay_applied_before_update() {
        let mut params = Params::<f64>::new();
        params.insert("w", Tensor::from_vec(vec![1], vec![2.0]));
        let mut opt = AdamW::new(0.1);
        // zero gradient: only decay acts (moments stay zero, eps guards div)
        opt.step(&mut params, &[Some(vec![0.0])], 0.5);
        let w = params.get("w").values()[0];
        assert!((w - 2.0 * (1.0 - 0.5 * 0.1)).abs() < 1e-12, "w {w}");
    }
}
