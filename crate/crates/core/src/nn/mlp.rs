//! Fully connected ReLU network with batched forward, forward-mode
//! tangents (Jacobian-vector products) and a reverse pass through both.
//!
//! Parameters live in one flat buffer. Layer `l` stores its weight as an
//! `(in, out)` row-major block followed by the `out` biases, so a batch
//! `X` of shape `(n, in)` maps to `X·W + b`.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView1, ArrayView2, ArrayViewMut2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    sizes: Vec<usize>,
    params: Vec<T>,
}

/// Activations kept by [`Mlp::forward_jvp`] for the reverse pass.
///
/// Rows `0..n` of every stacked matrix are primal values, rows `n..2n`
/// (when tangents were requested) are the matching tangents.
#[derive(Debug, Clone)]
pub struct JvpPass<T> {
    n: usize,
    with_tangent: bool,
    acts: Vec<Array2<T>>,
    masks: Vec<Array2<T>>,
}

impl<T: Scalar> JvpPass<T> {
    pub fn output(&self) -> ArrayView2<'_, T> {
        self.acts.last().expect("at least one layer").slice(s![..self.n, ..])
    }

    /// Output tangents `J·u̇`, one row per sample.
    pub fn tangent(&self) -> Option<ArrayView2<'_, T>> {
        self.with_tangent
            .then(|| self.acts.last().expect("at least one layer").slice(s![self.n.., ..]))
    }

    pub fn batch_size(&self) -> usize {
        self.n
    }
}

impl<T: Scalar> Mlp<T> {
    /// He-normal weights (std `sqrt(2/fan_in)`) and zero biases.
    pub fn init(sizes: &[usize], seed: u64) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in 0..net.num_layers() {
            let fan_in = sizes[l];
            let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
            let (w, _) = net.layer_ranges(l);
            for p in &mut net.params[w] {
                *p = T::lit(normal.sample(&mut rng));
            }
        }
        Ok(net)
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "layer sizes must have at least two positive entries, got {sizes:?}"
            )));
        }
        let n = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(Self {
            sizes: sizes.to_vec(),
            params: vec![T::zero(); n],
        })
    }

    pub fn from_params(sizes: &[usize], params: Vec<T>) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        if params.len() != net.params.len() {
            return Err(Error::DimensionMismatch {
                expected: net.params.len(),
                got: params.len(),
            });
        }
        net.params = params;
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("non-empty")
    }

    pub fn num_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    /// Index ranges of the weight block and the bias vector of layer `l`.
    pub fn layer_ranges(&self, l: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let mut off = 0;
        for k in 0..l {
            off += self.sizes[k] * self.sizes[k + 1] + self.sizes[k + 1];
        }
        let nw = self.sizes[l] * self.sizes[l + 1];
        (off..off + nw, off + nw..off + nw + self.sizes[l + 1])
    }

    /// `layer{l}.weight[i,j]` or `layer{l}.bias[j]` for a flat index.
    pub fn param_name(&self, idx: usize) -> String {
        Self::param_name_for(&self.sizes, idx)
    }

    /// As [`Mlp::param_name`] for a network with the given layer sizes.
    pub fn param_name_for(sizes: &[usize], idx: usize) -> String {
        let mut off = 0;
        for l in 0..sizes.len().saturating_sub(1) {
            let (fan_in, out) = (sizes[l], sizes[l + 1]);
            if idx < off + fan_in * out {
                let k = idx - off;
                return format!("layer{l}.weight[{},{}]", k / out, k % out);
            }
            off += fan_in * out;
            if idx < off + out {
                return format!("layer{l}.bias[{}]", idx - off);
            }
            off += out;
        }
        format!("param[{idx}]")
    }

    pub fn weight(&self, l: usize) -> ArrayView2<'_, T> {
        let (w, _) = self.layer_ranges(l);
        ArrayView2::from_shape((self.sizes[l], self.sizes[l + 1]), &self.params[w]).expect("layout")
    }

    pub fn bias(&self, l: usize) -> ArrayView1<'_, T> {
        let (_, b) = self.layer_ranges(l);
        ArrayView1::from(&self.params[b])
    }

    fn check_input(&self, cols: usize) -> Result<()> {
        if cols != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: cols,
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        let x = ArrayView2::from_shape((1, x.len()), x).expect("row vector");
        Ok(self.forward_batch(x)?.into_raw_vec_and_offset().0)
    }

    /// One row per sample.
    pub fn forward_batch(&self, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        self.check_input(x.ncols())?;
        let mut h = x.to_owned();
        for l in 0..self.num_layers() {
            let mut a = h.dot(&self.weight(l));
            a += &self.bias(l);
            if l + 1 < self.num_layers() {
                a.mapv_inplace(|v| if v > T::zero() { v } else { T::zero() });
            }
            h = a;
        }
        Ok(h)
    }

    /// Forward pass that keeps what the reverse pass needs. With `xdot`,
    /// tangents are pushed alongside so the pass also yields `J(x)·ẋ`.
    pub fn forward_jvp(&self, x: ArrayView2<'_, T>, xdot: Option<ArrayView2<'_, T>>) -> Result<JvpPass<T>> {
        self.check_input(x.ncols())?;
        let n = x.nrows();
        let k = if let Some(xd) = &xdot {
            if xd.dim() != x.dim() {
                return Err(Error::DimensionMismatch {
                    expected: n * x.ncols(),
                    got: xd.len(),
                });
            }
            2
        } else {
            1
        };
        let mut h0 = Array2::zeros((k * n, x.ncols()));
        h0.slice_mut(s![..n, ..]).assign(&x);
        if let Some(xd) = xdot {
            h0.slice_mut(s![n.., ..]).assign(&xd);
        }
        let layers = self.num_layers();
        let mut acts = Vec::with_capacity(layers + 1);
        let mut masks = Vec::with_capacity(layers.saturating_sub(1));
        acts.push(h0);
        for l in 0..layers {
            let mut a = acts[l].dot(&self.weight(l));
            {
                let mut primal = a.slice_mut(s![..n, ..]);
                primal += &self.bias(l);
            }
            if l + 1 < layers {
                let mask = a.slice(s![..n, ..]).mapv(|v| if v > T::zero() { T::one() } else { T::zero() });
                for mut half in a.axis_chunks_iter_mut(Axis(0), n.max(1)) {
                    half *= &mask;
                }
                masks.push(mask);
            }
            acts.push(a);
        }
        Ok(JvpPass {
            n,
            with_tangent: k == 2,
            acts,
            masks,
        })
    }

    /// Writes into `grad` the parameter gradient of a loss whose
    /// derivatives with respect to the outputs and (if present) the output
    /// tangents are `g_out` and `g_tan`.
    pub fn backward(
        &self,
        pass: &JvpPass<T>,
        g_out: ArrayView2<'_, T>,
        g_tan: Option<ArrayView2<'_, T>>,
        grad: &mut [T],
    ) -> Result<()> {
        if grad.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                got: grad.len(),
            });
        }
        let n = pass.n;
        let out = self.output_dim();
        if g_out.dim() != (n, out) {
            return Err(Error::DimensionMismatch {
                expected: n * out,
                got: g_out.len(),
            });
        }
        let k = if pass.with_tangent { 2 } else { 1 };
        let mut delta = Array2::zeros((k * n, out));
        delta.slice_mut(s![..n, ..]).assign(&g_out);
        if pass.with_tangent {
            match g_tan {
                Some(gt) if gt.dim() == (n, out) => delta.slice_mut(s![n.., ..]).assign(&gt),
                Some(gt) => {
                    return Err(Error::DimensionMismatch {
                        expected: n * out,
                        got: gt.len(),
                    })
                }
                None => {}
            }
        }
        for l in (0..self.num_layers()).rev() {
            let (wr, br) = self.layer_ranges(l);
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            {
                let mut gw = ArrayViewMut2::from_shape((fan_in, fan_out), &mut grad[wr]).expect("layout");
                general_mat_mul(T::one(), &pass.acts[l].t(), &delta, T::zero(), &mut gw);
            }
            let gb = delta.slice(s![..n, ..]).sum_axis(Axis(0));
            for (dst, v) in grad[br].iter_mut().zip(gb.iter()) {
                *dst = *v;
            }
            if l > 0 {
                let mut prev = delta.dot(&self.weight(l).t());
                let mask = &pass.masks[l - 1];
                for mut half in prev.axis_chunks_iter_mut(Axis(0), n.max(1)) {
                    half *= mask;
                }
                delta = prev;
            }
        }
        Ok(())
    }

    /// `∂output/∂input` at `x`, shape `(out, in)`. ReLU slope at 0 is 0.
    pub fn input_jacobian(&self, x: &[T]) -> Result<Array2<T>> {
        self.check_input(x.len())?;
        let d = x.len();
        let xs = Array2::from_shape_fn((d, d), |(_, j)| x[j]);
        let eye = Array2::eye(d);
        let pass = self.forward_jvp(xs.view(), Some(eye.view()))?;
        Ok(pass.tangent().expect("tangent requested").t().to_owned())
    }

    pub fn cast<U: Scalar>(&self) -> Mlp<U> {
        Mlp {
            sizes: self.sizes.clone(),
            params: self.params.iter().map(|p| U::lit(p.as_f64())).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }
}
