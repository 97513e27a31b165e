//! Adam with bias correction.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Optimizer state for one flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T> {
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    m: Vec<T>,
    v: Vec<T>,
    step: u64,
}

impl<T: Scalar> Adam<T> {
    pub fn new(num_params: usize) -> Self {
        Self {
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            eps: T::lit(1e-8),
            m: vec![T::zero(); num_params],
            v: vec![T::zero(); num_params],
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn moments(&self) -> (&[T], &[T]) {
        (&self.m, &self.v)
    }

    /// One update. `lrs` supplies a learning rate per index so parameter
    /// groups can move at different speeds. Nothing is modified when a
    /// gradient is non-finite; the error carries `name(index)`.
    pub fn step_with(
        &mut self,
        params: &mut [T],
        grads: &[T],
        lrs: impl Fn(usize) -> T,
        name: impl Fn(usize) -> String,
    ) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::DimensionMismatch {
                expected: self.m.len(),
                got: if params.len() != self.m.len() { params.len() } else { grads.len() },
            });
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient(name(i)));
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = T::one() - self.beta1.powi(t);
        let c2 = T::one() - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (T::one() - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (T::one() - self.beta2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= lrs(i) * mh / (vh.sqrt() + self.eps);
        }
        Ok(())
    }

    pub fn step(&mut self, params: &mut [T], grads: &[T], lr: T) -> Result<()> {
        self.step_with(params, grads, |_| lr, |i| format!("param[{i}]"))
    }
}
