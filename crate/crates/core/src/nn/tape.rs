//! Scalar reverse-mode AD on a Wengert list.
//!
//! Every operation records its value and the local partial derivatives
//! with respect to its (at most two) operands, so the backward sweep is a
//! single reverse pass of multiply-adds.
//!
//! ```
//! use lugre_pinn::nn::Tape;
//!
//! let tape = Tape::<f64>::new();
//! let x = tape.var(3.0);
//! let y = x * x + x.exp();
//! let g = tape.gradient(y);
//! assert!((g[x.index()] - (6.0 + 3f64.exp())).abs() < 1e-12);
//! ```

use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
struct Node<T> {
    parents: [usize; 2],
    partials: [T; 2],
}

/// Operation record. Variables are created with [`Tape::var`].
#[derive(Debug, Default)]
pub struct Tape<T> {
    nodes: RefCell<Vec<Node<T>>>,
}

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy)]
pub struct Var<'t, T: Scalar> {
    tape: &'t Tape<T>,
    idx: usize,
    val: T,
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Self {
            nodes: RefCell::new(Vec::new()),
        }
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            nodes: RefCell::new(Vec::with_capacity(n)),
        }
    }

    /// Drops all recorded nodes but keeps the allocation.
    pub fn clear(&self) {
        self.nodes.borrow_mut().clear();
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// New leaf.
    pub fn var(&self, value: T) -> Var<'_, T> {
        self.push(value, [usize::MAX; 2], [T::zero(); 2])
    }

    /// A constant is a leaf whose gradient nobody reads.
    pub fn constant(&self, value: T) -> Var<'_, T> {
        self.var(value)
    }

    fn push(&self, val: T, parents: [usize; 2], partials: [T; 2]) -> Var<'_, T> {
        let mut nodes = self.nodes.borrow_mut();
        let idx = nodes.len();
        nodes.push(Node { parents, partials });
        Var { tape: self, idx, val }
    }

    fn unary(&self, a: Var<'_, T>, val: T, da: T) -> Var<'_, T> {
        self.push(val, [a.idx, usize::MAX], [da, T::zero()])
    }

    fn binary(&self, a: Var<'_, T>, b: Var<'_, T>, val: T, da: T, db: T) -> Var<'_, T> {
        self.push(val, [a.idx, b.idx], [da, db])
    }

    /// Adjoints of every node with respect to `out`, indexed by [`Var::index`].
    pub fn gradient(&self, out: Var<'_, T>) -> Vec<T> {
        let mut adj = Vec::new();
        self.gradient_into(out, &mut adj);
        adj
    }

    /// As [`Tape::gradient`] but reusing `adj`.
    pub fn gradient_into(&self, out: Var<'_, T>, adj: &mut Vec<T>) {
        let nodes = self.nodes.borrow();
        adj.clear();
        adj.resize(nodes.len(), T::zero());
        adj[out.idx] = T::one();
        for i in (0..=out.idx).rev() {
            let a = adj[i];
            if a == T::zero() {
                continue;
            }
            let n = &nodes[i];
            for k in 0..2 {
                let p = n.parents[k];
                if p != usize::MAX {
                    adj[p] += a * n.partials[k];
                }
            }
        }
    }
}

impl<'t, T: Scalar> Var<'t, T> {
    pub fn value(&self) -> T {
        self.val
    }

    pub fn index(&self) -> usize {
        self.idx
    }

    pub fn exp(self) -> Self {
        let e = self.val.exp();
        self.tape.unary(self, e, e)
    }

    /// Subgradient 0 at the origin.
    pub fn abs(self) -> Self {
        let d = if self.val > T::zero() {
            T::one()
        } else if self.val < T::zero() {
            -T::one()
        } else {
            T::zero()
        };
        self.tape.unary(self, self.val.abs(), d)
    }

    pub fn square(self) -> Self {
        self.tape.unary(self, self.val * self.val, self.val + self.val)
    }

    /// Derivative 0 at the origin.
    pub fn relu(self) -> Self {
        if self.val > T::zero() {
            self.tape.unary(self, self.val, T::one())
        } else {
            self.tape.unary(self, T::zero(), T::zero())
        }
    }

    /// `min(self, c)`; the derivative is zero where the cap is active.
    pub fn min_const(self, c: T) -> Self {
        if self.val > c {
            self.tape.unary(self, c, T::zero())
        } else {
            self.tape.unary(self, self.val, T::one())
        }
    }
}

impl<'t, T: Scalar> Add for Var<'t, T> {
    type Output = Var<'t, T>;
    fn add(self, rhs: Self) -> Self {
        self.tape.binary(self, rhs, self.val + rhs.val, T::one(), T::one())
    }
}

impl<'t, T: Scalar> Sub for Var<'t, T> {
    type Output = Var<'t, T>;
    fn sub(self, rhs: Self) -> Self {
        self.tape.binary(self, rhs, self.val - rhs.val, T::one(), -T::one())
    }
}

impl<'t, T: Scalar> Mul for Var<'t, T> {
    type Output = Var<'t, T>;
    fn mul(self, rhs: Self) -> Self {
        self.tape.binary(self, rhs, self.val * rhs.val, rhs.val, self.val)
    }
}

impl<'t, T: Scalar> Div for Var<'t, T> {
    type Output = Var<'t, T>;
    fn div(self, rhs: Self) -> Self {
        let q = self.val / rhs.val;
        self.tape.binary(self, rhs, q, T::one() / rhs.val, -q / rhs.val)
    }
}

impl<'t, T: Scalar> Neg for Var<'t, T> {
    type Output = Var<'t, T>;
    fn neg(self) -> Self {
        self.tape.unary(self, -self.val, -T::one())
    }
}

impl<'t, T: Scalar> Add<T> for Var<'t, T> {
    type Output = Var<'t, T>;
    fn add(self, rhs: T) -> Self {
        self.tape.unary(self, self.val + rhs, T::one())
    }
}

impl<'t, T: Scalar> Sub<T> for Var<'t, T> {
    type Output = Var<'t, T>;
    fn sub(self, rhs: T) -> Self {
        self.tape.unary(self, self.val - rhs, T::one())
    }
}

impl<'t, T: Scalar> Mul<T> for Var<'t, T> {
    type Output = Var<'t, T>;
    fn mul(self, rhs: T) -> Self {
        self.tape.unary(self, self.val * rhs, rhs)
    }
}

impl<'t, T: Scalar> Div<T> for Var<'t, T> {
    type Output = Var<'t, T>;
    fn div(self, rhs: T) -> Self {
        self.tape.unary(self, self.val / rhs, T::one() / rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
        let h = 1e-6 * x.abs().max(1.0);
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn product_and_quotient_rules() {
        let t = Tape::new();
        let x = t.var(1.5);
        let y = t.var(-0.7);
        let f = x * y / (x + y.square());
        let g = t.gradient(f);
        let fx = |a: f64| a * -0.7 / (a + 0.49);
        let fy = |b: f64| 1.5 * b / (1.5 + b * b);
        assert!((g[x.index()] - fd(fx, 1.5)).abs() < 1e-8);
        assert!((g[y.index()] - fd(fy, -0.7)).abs() < 1e-8);
    }

    #[test]
    fn exp_abs_neg_and_constants() {
        let t = Tape::new();
        let x = t.var(-0.3);
        let f = -(x.abs() * 2.0).exp() + x * 3.0 - 1.0;
        let g = t.gradient(f);
        let exact = |a: f64| -(2.0 * a.abs()).exp() + 3.0 * a - 1.0;
        assert!((f.value() - exact(-0.3)).abs() < 1e-15);
        assert!((g[x.index()] - fd(exact, -0.3)).abs() < 1e-8);
    }

    #[test]
    fn kinks_use_zero_subgradient() {
        let t = Tape::new();
        let x = t.var(0.0);
        let f = x.abs() + x.relu();
        assert_eq!(t.gradient(f)[x.index()], 0.0);
        let y = t.var(2.0);
        let c = y.min_const(1.0);
        assert_eq!(c.value(), 1.0);
        assert_eq!(t.gradient(c)[y.index()], 0.0);
    }

    #[test]
    fn reused_variable_accumulates() {
        let t = Tape::new();
        let x = t.var(2.0f64);
        let f = x * x * x;
        assert!((t.gradient(f)[x.index()] - 12.0).abs() < 1e-12);
        t.clear();
        assert!(t.is_empty());
    }
}
