//! Physics-informed friction estimators.
//!
//! Black-box variants (`BB`) regress the friction force directly through the
//! horizontal equation-of-motion residual. Parameter-estimation variants
//! (`PE`) output the bristle state `ẑ`, carry six learnable LuGre scalars and
//! add a penalty tying `ż_model = ∂ẑ/∂u · u̇` to the LuGre bristle rate.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ndarray::{Array2, ArrayView2, Axis};

use crate::datagen::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::friction::{LuGreParams, PARAM_NAMES};
use crate::nn::{Adam, Mlp, ModelFile, Tape};
use crate::numerics::finite_diff_central;
use crate::scalar::Scalar;
use crate::systems::{friction_from_eom, PoBParams};

/// Cap on `(v/v_s)²` inside the Stribeck exponential.
pub const STRIBECK_EXPONENT_CAP: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Bb1,
    Bb2,
    Pe1,
    Pe2,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Bb1, Variant::Bb2, Variant::Pe1, Variant::Pe2];

    pub fn is_pe(self) -> bool {
        matches!(self, Variant::Pe1 | Variant::Pe2)
    }

    /// Second-generation variants also see the would-be acceleration.
    pub fn uses_would_be_acceleration(self) -> bool {
        matches!(self, Variant::Bb2 | Variant::Pe2)
    }

    pub fn input_dim(self) -> usize {
        if self.uses_would_be_acceleration() {
            3
        } else {
            2
        }
    }

    pub fn input_names(self) -> &'static [&'static str] {
        if self.uses_would_be_acceleration() {
            &["xdot_b", "f_n_est", "xddot_star"]
        } else {
            &["xdot_b", "f_n_est"]
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Bb1 => "bb1",
            Variant::Bb2 => "bb2",
            Variant::Pe1 => "pe1",
            Variant::Pe2 => "pe2",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bb1" => Ok(Variant::Bb1),
            "bb2" => Ok(Variant::Bb2),
            "pe1" => Ok(Variant::Pe1),
            "pe2" => Ok(Variant::Pe2),
            _ => Err(Error::InvalidArgument(format!(
                "unknown variant `{s}` (expected bb1, bb2, pe1 or pe2)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub variant: Variant,
    pub hidden_layers: usize,
    pub width: usize,
}

impl ModelConfig {
    /// Four hidden layers, 128 wide for the first-generation variants and
    /// 512 wide for the second.
    pub fn default_for(variant: Variant) -> Self {
        Self {
            variant,
            hidden_layers: 4,
            width: if variant.uses_would_be_acceleration() { 512 } else { 128 },
        }
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.variant.input_dim()];
        sizes.extend(std::iter::repeat_n(self.width, self.hidden_layers));
        sizes.push(1);
        sizes
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauConfig {
    pub patience: usize,
    pub factor: f64,
    pub min_lr: f64,
    /// Relative improvement that counts as progress.
    pub threshold: f64,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        Self {
            patience: 200,
            factor: 0.5,
            min_lr: 1e-5,
            threshold: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LrSchedule {
    Fixed,
    Plateau(PlateauConfig),
}

/// Reduce-on-plateau learning-rate controller.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateauScheduler {
    cfg: PlateauConfig,
    lr: f64,
    best: f64,
    stale: usize,
}

impl PlateauScheduler {
    pub fn new(lr: f64, cfg: PlateauConfig) -> Self {
        Self {
            cfg,
            lr,
            best: f64::INFINITY,
            stale: 0,
        }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    /// Feeds one epoch loss and returns the learning rate for the next step.
    pub fn observe(&mut self, loss: f64) -> f64 {
        if loss < self.best * (1.0 - self.cfg.threshold) || self.best.is_infinite() {
            self.best = loss;
            self.stale = 0;
        } else {
            self.stale += 1;
            if self.stale >= self.cfg.patience {
                self.lr = (self.lr * self.cfg.factor).max(self.cfg.min_lr);
                self.stale = 0;
            }
        }
        self.lr
    }
}

/// Learning rate after replaying `history` through a [`PlateauScheduler`].
pub fn lr_plateau_schedule(history: &[f64], lr: f64, cfg: PlateauConfig) -> f64 {
    let mut s = PlateauScheduler::new(lr, cfg);
    for &l in history {
        s.observe(l);
    }
    s.lr()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Network learning rate (initial value under a plateau schedule).
    pub lr: f64,
    pub schedule: LrSchedule,
    /// Weight of the bristle-rate consistency term (PE only).
    pub lambda: f64,
    /// Learning rate of the log-space LuGre scalars (PE only).
    pub scalar_lr: f64,
    pub seed: u64,
    pub init_scalars: LuGreParams<f64>,
    /// When false every wall-clock field is written as 0 so repeated runs
    /// produce identical bytes.
    pub record_timing: bool,
}

impl TrainConfig {
    /// Full-batch, 10 000 epochs; fixed 1e-4 for the first-generation
    /// variants, 1e-3 with plateau halving for the second.
    pub fn default_for(variant: Variant) -> Self {
        let (lr, schedule) = if variant.uses_would_be_acceleration() {
            (1e-3, LrSchedule::Plateau(PlateauConfig::default()))
        } else {
            (1e-4, LrSchedule::Fixed)
        };
        Self {
            epochs: 10_000,
            lr,
            schedule,
            lambda: 1e5,
            scalar_lr: 1e-2,
            seed: 0,
            init_scalars: LuGreParams::initial_guess(),
            record_timing: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) || !(self.scalar_lr > 0.0) {
            return Err(Error::InvalidArgument("learning rates must be positive".into()));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidArgument("lambda must be non-negative".into()));
        }
        if let LrSchedule::Plateau(p) = self.schedule {
            if !(p.factor > 0.0 && p.factor < 1.0) || !(p.min_lr > 0.0) {
                return Err(Error::InvalidArgument("plateau factor must lie in (0,1), min_lr > 0".into()));
            }
        }
        self.init_scalars.validate()
    }
}

/// Network inputs, their time derivatives, and the physical columns the
/// losses need, gathered from a dataset.
#[derive(Debug, Clone)]
pub struct Batch<T> {
    /// Physical inputs `u`, one row per sample.
    pub inputs: Array2<T>,
    /// `u̇`: measured `ẍ_b` plus finite differences of the derived inputs.
    pub input_rates: Array2<T>,
    pub v: Vec<T>,
    pub f_n: Vec<T>,
    /// Friction implied by the equation of motion.
    pub target: Vec<T>,
    /// Index of each row in the source dataset.
    pub rows: Vec<usize>,
}

impl<T: Scalar> Batch<T> {
    /// With `drop_endpoints`, the first and last sample of each trial (whose
    /// rates come from one-sided differences) are left out.
    pub fn from_dataset(ds: &Dataset, variant: Variant, pob: &PoBParams<f64>, drop_endpoints: bool) -> Result<Self> {
        let d = variant.input_dim();
        let dt = ds.dt();
        let mut inputs = Vec::new();
        let mut rates = Vec::new();
        let (mut v, mut f_n, mut target, mut rows) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut start = 0;
        for trial in ds.trials() {
            let n = trial.len();
            let fn_col: Vec<f64> = trial.iter().map(|s| s.f_n_est).collect();
            let xs_col: Vec<f64> = trial.iter().map(|s| s.xddot_star).collect();
            let (dfn, dxs) = if n >= 3 {
                (finite_diff_central(&fn_col, dt)?, finite_diff_central(&xs_col, dt)?)
            } else {
                (vec![0.0; n], vec![0.0; n])
            };
            for (k, s) in trial.iter().enumerate() {
                if drop_endpoints && (k == 0 || k + 1 == n) {
                    continue;
                }
                inputs.push(T::lit(s.xdot_b));
                inputs.push(T::lit(s.f_n_est));
                rates.push(T::lit(s.xddot_b));
                rates.push(T::lit(dfn[k]));
                if d == 3 {
                    inputs.push(T::lit(s.xddot_star));
                    rates.push(T::lit(dxs[k]));
                }
                v.push(T::lit(s.xdot_b));
                f_n.push(T::lit(s.f_n_est));
                target.push(T::lit(sample_target(s, pob)));
                rows.push(start + k);
            }
            start += n;
        }
        let n = rows.len();
        if n == 0 {
            return Err(Error::TooFewSamples { needed: 1, got: 0 });
        }
        Ok(Self {
            inputs: Array2::from_shape_vec((n, d), inputs).expect("row-major"),
            input_rates: Array2::from_shape_vec((n, d), rates).expect("row-major"),
            v,
            f_n,
            target,
            rows,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Equation-of-motion friction `−[(m_b+m_L)ẍ_b + m_L d(θ̈cosθ − θ̇² sinθ)]`.
pub fn sample_target(s: &Sample, pob: &PoBParams<f64>) -> f64 {
    friction_from_eom(s.xddot_b, s.theta, s.thetadot, s.thetaddot, pob)
}

/// A network with its input standardization, output scale and (PE) LuGre
/// scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct PinnModel<T> {
    pub variant: Variant,
    pub net: Mlp<T>,
    pub input_mean: Vec<T>,
    pub input_std: Vec<T>,
    /// Network output times this is `F̂_f` (BB) or `ẑ` (PE).
    pub out_scale: T,
    /// Log-space LuGre scalars, PE only.
    pub log_scalars: Option<[T; 6]>,
}

/// Per-sample PE quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct PeOutputs<T> {
    pub z_hat: Vec<T>,
    pub zdot_model: Vec<T>,
    pub zdot_lugre: Vec<T>,
    pub force: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossTerms<T> {
    pub total: T,
    pub physics: T,
    pub bristle: T,
}

fn mean_std<T: Scalar>(col: impl Iterator<Item = T> + Clone) -> (T, T) {
    let n = T::lit(col.clone().count().max(1) as f64);
    let mean = col.clone().fold(T::zero(), |a, b| a + b) / n;
    let var = col.fold(T::zero(), |a, b| a + (b - mean) * (b - mean)) / n;
    (mean, var.sqrt())
}

impl<T: Scalar> PinnModel<T> {
    /// Fresh He-initialized model with standardization fitted to `batch`.
    pub fn new(cfg: &ModelConfig, batch: &Batch<T>, init_scalars: &LuGreParams<f64>, seed: u64) -> Result<Self> {
        let net = Mlp::init(&cfg.layer_sizes(), seed)?;
        let d = cfg.variant.input_dim();
        if batch.inputs.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: batch.inputs.ncols(),
            });
        }
        let mut input_mean = Vec::with_capacity(d);
        let mut input_std = Vec::with_capacity(d);
        for c in 0..d {
            let (m, s) = mean_std(batch.inputs.column(c).iter().copied());
            input_mean.push(m);
            input_std.push(if s > T::zero() { s } else { T::one() });
        }
        let (_, f_std) = mean_std(batch.target.iter().copied());
        let f_std = if f_std > T::zero() { f_std } else { T::one() };
        let (out_scale, log_scalars) = if cfg.variant.is_pe() {
            init_scalars.validate()?;
            let log = init_scalars.cast::<T>().to_log();
            (f_std / T::lit(init_scalars.sigma0), Some(log))
        } else {
            (f_std, None)
        };
        Ok(Self {
            variant: cfg.variant,
            net,
            input_mean,
            input_std,
            out_scale,
            log_scalars,
        })
    }

    /// Learned LuGre parameters in natural units (PE only).
    pub fn lugre_params(&self) -> Option<LuGreParams<T>> {
        self.log_scalars.map(|l| LuGreParams::from_log(&l))
    }

    pub fn cast<U: Scalar>(&self) -> PinnModel<U> {
        let conv = |v: &[T]| v.iter().map(|x| U::lit(x.as_f64())).collect::<Vec<U>>();
        PinnModel {
            variant: self.variant,
            net: self.net.cast(),
            input_mean: conv(&self.input_mean),
            input_std: conv(&self.input_std),
            out_scale: U::lit(self.out_scale.as_f64()),
            log_scalars: self.log_scalars.map(|l| l.map(|x| U::lit(x.as_f64()))),
        }
    }

    pub fn normalize(&self, u: ArrayView2<'_, T>) -> Array2<T> {
        let mut x = u.to_owned();
        for (c, mut col) in x.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.input_mean[c], self.input_std[c]);
            col.mapv_inplace(|v| (v - m) / s);
        }
        x
    }

    pub fn normalize_rates(&self, ud: ArrayView2<'_, T>) -> Array2<T> {
        let mut x = ud.to_owned();
        for (c, mut col) in x.axis_iter_mut(Axis(1)).enumerate() {
            let s = self.input_std[c];
            col.mapv_inplace(|v| v / s);
        }
        x
    }

    /// Raw network output times the output scale, per row of physical inputs.
    pub fn scaled_output(&self, u: ArrayView2<'_, T>) -> Result<Vec<T>> {
        let y = self.net.forward_batch(self.normalize(u).view())?;
        Ok(y.column(0).iter().map(|&o| o * self.out_scale).collect())
    }

    /// `ẑ` and `ż_model = J(u)·u̇` per sample (PE) or `F̂` and its rate (BB).
    pub fn output_and_rate(&self, u: ArrayView2<'_, T>, ud: ArrayView2<'_, T>) -> Result<(Vec<T>, Vec<T>)> {
        let x = self.normalize(u);
        let xd = self.normalize_rates(ud);
        let pass = self.net.forward_jvp(x.view(), Some(xd.view()))?;
        let out = pass.output().column(0).iter().map(|&o| o * self.out_scale).collect();
        let tan = pass
            .tangent()
            .expect("tangent requested")
            .column(0)
            .iter()
            .map(|&o| o * self.out_scale)
            .collect();
        Ok((out, tan))
    }

    pub fn pe_forward(&self, batch: &Batch<T>) -> Result<PeOutputs<T>> {
        let p = self.lugre_params().ok_or_else(|| {
            Error::InvalidArgument(format!("variant {} has no LuGre scalars", self.variant))
        })?;
        let (z_hat, zdot_model) = self.output_and_rate(batch.inputs.view(), batch.input_rates.view())?;
        let mut zdot_lugre = Vec::with_capacity(batch.len());
        let mut force = Vec::with_capacity(batch.len());
        for i in 0..batch.len() {
            let (zl, f) = pe_head(&p, batch.v[i], batch.f_n[i], z_hat[i], zdot_model[i]);
            zdot_lugre.push(zl);
            force.push(f);
        }
        Ok(PeOutputs {
            z_hat,
            zdot_model,
            zdot_lugre,
            force,
        })
    }

    /// Friction estimate for every row of `batch`.
    pub fn predict(&self, batch: &Batch<T>) -> Result<Vec<T>> {
        if self.variant.is_pe() {
            Ok(self.pe_forward(batch)?.force)
        } else {
            self.scaled_output(batch.inputs.view())
        }
    }

    /// Friction estimate for one measured sample. PE variants need the
    /// input rates `u̇`, in the order of [`Variant::input_names`].
    pub fn estimate_online(&self, u: &[T], u_rate: Option<&[T]>) -> Result<T> {
        let d = self.variant.input_dim();
        if u.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: u.len() });
        }
        let uv = ArrayView2::from_shape((1, d), u).expect("row");
        if !self.variant.is_pe() {
            return Ok(self.scaled_output(uv)?[0]);
        }
        let ud = u_rate.ok_or_else(|| Error::MissingColumn("input rates".into()))?;
        if ud.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: ud.len() });
        }
        let udv = ArrayView2::from_shape((1, d), ud).expect("row");
        let (z, zm) = self.output_and_rate(uv, udv)?;
        let p = self.lugre_params().expect("PE model carries scalars");
        Ok(pe_head(&p, u[0], u[1], z[0], zm[0]).1)
    }

    pub fn physics_loss_bb(&self, batch: &Batch<T>) -> Result<T> {
        let f = self.scaled_output(batch.inputs.view())?;
        let n = T::lit(batch.len() as f64);
        Ok(f.iter().zip(&batch.target).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>() / n)
    }

    pub fn total_loss_pe(&self, batch: &Batch<T>, lambda: T) -> Result<LossTerms<T>> {
        let out = self.pe_forward(batch)?;
        let n = T::lit(batch.len() as f64);
        let mut lp = T::zero();
        let mut lz = T::zero();
        for i in 0..batch.len() {
            let r = out.force[i] - batch.target[i];
            let e = out.zdot_lugre[i] - out.zdot_model[i];
            lp += r * r;
            lz += e * e;
        }
        lp /= n;
        lz /= n;
        Ok(LossTerms {
            total: lp + lambda * lz,
            physics: lp,
            bristle: lz,
        })
    }

    /// Loss and gradients for the network parameters and (PE) the
    /// log-space scalars.
    pub fn loss_and_grad(&self, batch: &Batch<T>, lambda: T, grad_net: &mut [T], grad_log: &mut [T; 6]) -> Result<LossTerms<T>> {
        let n = batch.len();
        let inv_n = T::one() / T::lit(n as f64);
        *grad_log = [T::zero(); 6];
        let x = self.normalize(batch.inputs.view());
        if !self.variant.is_pe() {
            let pass = self.net.forward_jvp(x.view(), None)?;
            let mut g = Array2::zeros((n, 1));
            let mut lp = T::zero();
            for (i, &o) in pass.output().column(0).iter().enumerate() {
                let r = o * self.out_scale - batch.target[i];
                lp += r * r;
                g[[i, 0]] = (r + r) * inv_n * self.out_scale;
            }
            self.net.backward(&pass, g.view(), None, grad_net)?;
            let lp = lp * inv_n;
            return Ok(LossTerms {
                total: lp,
                physics: lp,
                bristle: T::zero(),
            });
        }

        let log = self.log_scalars.expect("PE model carries scalars");
        let nat: Vec<T> = log.iter().map(|l| l.exp()).collect();
        let xd = self.normalize_rates(batch.input_rates.view());
        let pass = self.net.forward_jvp(x.view(), Some(xd.view()))?;
        let out = pass.output();
        let tan = pass.tangent().expect("tangent requested");
        let mut g_out = Array2::zeros((n, 1));
        let mut g_tan = Array2::zeros((n, 1));
        let tape = Tape::with_capacity(64);
        let mut adj = Vec::with_capacity(64);
        let (mut lp, mut lz) = (T::zero(), T::zero());
        for i in 0..n {
            tape.clear();
            let s: Vec<_> = nat.iter().map(|&v| tape.var(v)).collect();
            let z = tape.var(out[[i, 0]] * self.out_scale);
            let zm = tape.var(tan[[i, 0]] * self.out_scale);
            let (zl, f) = pe_head_tape(&tape, &s, batch.v[i], batch.f_n[i], z, zm);
            let r = f - batch.target[i];
            let e = zl - zm;
            let r2 = r.square();
            let e2 = e.square();
            lp += r2.value();
            lz += e2.value();
            let li = (r2 + e2 * lambda) * inv_n;
            tape.gradient_into(li, &mut adj);
            g_out[[i, 0]] = adj[z.index()] * self.out_scale;
            g_tan[[i, 0]] = adj[zm.index()] * self.out_scale;
            for k in 0..6 {
                grad_log[k] += adj[s[k].index()] * nat[k];
            }
        }
        self.net.backward(&pass, g_out.view(), Some(g_tan.view()), grad_net)?;
        let (lp, lz) = (lp * inv_n, lz * inv_n);
        Ok(LossTerms {
            total: lp + lambda * lz,
            physics: lp,
            bristle: lz,
        })
    }

    pub fn to_model_file(&self) -> ModelFile {
        let mut f = ModelFile::default();
        f.set_meta("variant", self.variant);
        let sizes: Vec<String> = self.net.layer_sizes().iter().map(usize::to_string).collect();
        f.set_meta("layer_sizes", sizes.join(","));
        f.set_meta("inputs", self.variant.input_names().join(","));
        f.set_meta("out_scale", format!("{:.16e}", self.out_scale.as_f64()));
        let to64 = |v: &[T]| v.iter().map(|x| x.as_f64()).collect::<Vec<_>>();
        let d = self.input_mean.len();
        f.set_array("input_mean", &[d], to64(&self.input_mean));
        f.set_array("input_std", &[d], to64(&self.input_std));
        for l in 0..self.net.num_layers() {
            let (w, b) = self.net.layer_ranges(l);
            let sz = self.net.layer_sizes();
            f.set_array(&format!("layer{l}.weight"), &[sz[l], sz[l + 1]], to64(&self.net.params()[w]));
            f.set_array(&format!("layer{l}.bias"), &[sz[l + 1]], to64(&self.net.params()[b]));
        }
        if let Some(p) = self.lugre_params() {
            f.set_array("lugre_params", &[6], to64(&p.to_array()));
            f.set_meta("lugre_names", PARAM_NAMES.join(","));
        }
        f
    }

    pub fn from_model_file(f: &ModelFile) -> Result<Self> {
        let variant: Variant = f.meta("variant")?.parse()?;
        let sizes = f
            .meta("layer_sizes")?
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| Error::ModelFormat(format!("bad layer size `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        if sizes.first() != Some(&variant.input_dim()) || sizes.last() != Some(&1) {
            return Err(Error::ModelFormat(format!("layer sizes {sizes:?} do not fit variant {variant}")));
        }
        let mut net = Mlp::<T>::zeros(&sizes)?;
        for l in 0..net.num_layers() {
            let (w, b) = net.layer_ranges(l);
            for (name, range) in [(format!("layer{l}.weight"), w), (format!("layer{l}.bias"), b)] {
                let arr = f.array(&name)?;
                if arr.data.len() != range.len() {
                    return Err(Error::ModelFormat(format!("array `{name}` has the wrong size")));
                }
                for (dst, v) in net.params_mut()[range].iter_mut().zip(&arr.data) {
                    *dst = T::lit(*v);
                }
            }
        }
        let vec_of = |name: &str| -> Result<Vec<T>> {
            let a = f.array(name)?;
            if a.data.len() != variant.input_dim() {
                return Err(Error::ModelFormat(format!("array `{name}` has the wrong size")));
            }
            Ok(a.data.iter().map(|&v| T::lit(v)).collect())
        };
        let out_scale: f64 = f
            .meta("out_scale")?
            .parse()
            .map_err(|_| Error::ModelFormat("bad out_scale".into()))?;
        let log_scalars = if variant.is_pe() {
            let a = f.array("lugre_params")?;
            if a.data.len() != 6 || a.data.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                return Err(Error::ModelFormat("lugre_params must hold six positive values".into()));
            }
            let mut log = [T::zero(); 6];
            for k in 0..6 {
                log[k] = T::lit(a.data[k].ln());
            }
            Some(log)
        } else {
            None
        };
        Ok(Self {
            variant,
            net,
            input_mean: vec_of("input_mean")?,
            input_std: vec_of("input_std")?,
            out_scale: T::lit(out_scale),
            log_scalars,
        })
    }
}

/// Bristle rate `ż_LuGre` and force `σ0 ẑ + σ1 ż_model + σ2 v`.
pub fn pe_head<T: Scalar>(p: &LuGreParams<T>, v: T, f_n: T, z: T, zdot_model: T) -> (T, T) {
    let q = (v / p.v_s) * (v / p.v_s);
    let q = q.min(T::lit(STRIBECK_EXPONENT_CAP));
    let g = p.mu_c * f_n + (p.mu_s - p.mu_c) * f_n * (-q).exp();
    let zdot = v - p.sigma0 * v.abs() * z / g;
    let force = p.sigma0 * z + p.sigma1 * zdot_model + p.sigma2 * v;
    (zdot, force)
}

fn pe_head_tape<'t, T: Scalar>(
    tape: &'t Tape<T>,
    s: &[crate::nn::Var<'t, T>],
    v: T,
    f_n: T,
    z: crate::nn::Var<'t, T>,
    zm: crate::nn::Var<'t, T>,
) -> (crate::nn::Var<'t, T>, crate::nn::Var<'t, T>) {
    let (s0, s1, s2, mc, ms, vs) = (s[0], s[1], s[2], s[3], s[4], s[5]);
    let q = (tape.constant(v) / vs).square().min_const(T::lit(STRIBECK_EXPONENT_CAP));
    let g = mc * f_n + (ms - mc) * f_n * (-q).exp();
    let zdot = -(s0 * (z / g) * v.abs()) + v;
    let force = s0 * z + s1 * zm + s2 * v;
    (zdot, force)
}

/// One row of the loss history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub total: f64,
    pub physics: f64,
    pub bristle: f64,
    pub lr: f64,
    pub wall_clock: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedModel<T> {
    pub model: PinnModel<T>,
    pub history: Vec<EpochRecord>,
    /// Loss after the last update.
    pub final_loss: LossTerms<f64>,
    pub wall_clock: f64,
    pub config: TrainConfig,
}

impl<T: Scalar> TrainedModel<T> {
    pub fn variant(&self) -> Variant {
        self.model.variant
    }

    pub fn lugre_params(&self) -> Option<LuGreParams<f64>> {
        self.model.lugre_params().map(|p| p.cast())
    }

    pub fn to_model_file(&self) -> ModelFile {
        let mut f = self.model.to_model_file();
        f.set_meta("seed", self.config.seed);
        f.set_meta("epochs", self.config.epochs);
        f.set_meta("lambda", format!("{:e}", self.config.lambda));
        f.set_meta("wall_clock_s", format!("{:.6}", self.wall_clock));
        f.set_meta("final_loss", format!("{:.16e}", self.final_loss.total));
        f
    }

    /// Loss history as CSV: `epoch,total,L_P,L_z,lr,wall_clock`.
    pub fn history_csv(&self) -> String {
        let mut s = String::from("epoch,total,L_P,L_z,lr,wall_clock\n");
        for r in &self.history {
            s.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.6}\n",
                r.epoch, r.total, r.physics, r.bristle, r.lr, r.wall_clock
            ));
        }
        s
    }
}

/// Full-batch Adam training of one variant on `dataset`.
pub fn train<T: Scalar>(
    model_cfg: &ModelConfig,
    cfg: &TrainConfig,
    dataset: &Dataset,
    pob: &PoBParams<f64>,
) -> Result<TrainedModel<T>> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let variant = model_cfg.variant;
    let batch = Batch::<T>::from_dataset(dataset, variant, pob, variant.is_pe())?;
    let model = PinnModel::new(model_cfg, &batch, &cfg.init_scalars, cfg.seed)?;
    train_model(model, cfg, &batch)
}

/// Trains an existing model on a prepared batch.
pub fn train_model<T: Scalar>(model: PinnModel<T>, cfg: &TrainConfig, batch: &Batch<T>) -> Result<TrainedModel<T>> {
    train_model_with(model, cfg, batch, |_, _| {})
}

/// As [`train_model`], calling `on_epoch` with each history record and the
/// model before that epoch's update.
pub fn train_model_with<T: Scalar>(
    mut model: PinnModel<T>,
    cfg: &TrainConfig,
    batch: &Batch<T>,
    mut on_epoch: impl FnMut(&EpochRecord, &PinnModel<T>),
) -> Result<TrainedModel<T>> {
    let start = Instant::now();
    let clock = |s: &Instant| if cfg.record_timing { s.elapsed().as_secs_f64() } else { 0.0 };
    let lambda = T::lit(cfg.lambda);
    let mut grad_net = vec![T::zero(); model.net.num_params()];
    let mut grad_log = [T::zero(); 6];
    let mut adam_net = Adam::new(model.net.num_params());
    let mut adam_log = Adam::new(6);
    let mut plateau = match cfg.schedule {
        LrSchedule::Plateau(p) => Some(PlateauScheduler::new(cfg.lr, p)),
        LrSchedule::Fixed => None,
    };
    let mut lr = cfg.lr;
    let mut history = Vec::with_capacity(cfg.epochs);
    let sizes = model.net.layer_sizes().to_vec();
    for epoch in 0..cfg.epochs {
        let loss = model.loss_and_grad(batch, lambda, &mut grad_net, &mut grad_log)?;
        if !loss.physics.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, term: "L_P" });
        }
        if !loss.bristle.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, term: "L_z" });
        }
        history.push(EpochRecord {
            epoch,
            total: loss.total.as_f64(),
            physics: loss.physics.as_f64(),
            bristle: loss.bristle.as_f64(),
            lr,
            wall_clock: clock(&start),
        });
        on_epoch(history.last().expect("just pushed"), &model);
        adam_net.step_with(
            model.net.params_mut(),
            &grad_net,
            |_| T::lit(lr),
            |i| Mlp::<T>::param_name_for(&sizes, i),
        )?;
        if let Some(log) = model.log_scalars.as_mut() {
            adam_log.step_with(log, &grad_log, |_| T::lit(cfg.scalar_lr), |k| format!("log_{}", PARAM_NAMES[k]))?;
        }
        if let Some(p) = plateau.as_mut() {
            lr = p.observe(loss.total.as_f64());
        }
    }
    let fl = if model.variant.is_pe() {
        model.total_loss_pe(batch, lambda)?
    } else {
        let l = model.physics_loss_bb(batch)?;
        LossTerms {
            total: l,
            physics: l,
            bristle: T::zero(),
        }
    };
    Ok(TrainedModel {
        model,
        history,
        final_loss: LossTerms {
            total: fl.total.as_f64(),
            physics: fl.physics.as_f64(),
            bristle: fl.bristle.as_f64(),
        },
        wall_clock: clock(&start),
        config: *cfg,
    })
}
