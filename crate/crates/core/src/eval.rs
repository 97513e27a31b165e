//! Evaluation of friction estimators: closed-loop simulation with a learned
//! model in place of LuGre, online estimation on noisy measurements,
//! transfer to the spring-damper-on-a-box, steady-state maps and the
//! speed/accuracy table.

use std::fmt::Write as _;
use std::time::Instant;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::datagen::{add_noise, simulate_trial, Dataset, Sample, SimSettings, TrialSpec};
use crate::error::{Error, Result};
use crate::friction::{coulomb_viscous_force, lugre_steady_state_force, LuGreParams};
use crate::numerics::{integrate_rk45, resample, OdeOptions};
use crate::pinn::{Batch, PinnModel};
use crate::scalar::Scalar;
use crate::systems::{
    normal_force_estimate, pob_accelerations, pob_accelerations_affine, pob_dynamics, sdob_dynamics,
    sdob_would_be_acceleration, would_be_acceleration, PoBParams, PoBState, SDoBParams, SDoBState,
};

/// Samples with `|ẋ| <` this count as stick.
pub const STICK_VELOCITY: f64 = 1e-3;

/// Noise seeds of the evaluation trajectories, disjoint from training.
pub const EVAL_NOISE_SEED: u64 = 1001;

/// The two evaluation trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trajectory {
    /// 2 s swing, ±50°, 1 Hz.
    Swing,
    /// The stick-slip translation gait.
    Translation,
}

impl Trajectory {
    pub const TRANSLATION_DURATION: f64 = 4.5;

    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Trajectory::Swing),
            2 => Ok(Trajectory::Translation),
            _ => Err(Error::InvalidArgument(format!("unknown trajectory {i} (expected 1 or 2)"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Trajectory::Swing => 1,
            Trajectory::Translation => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Trajectory::Swing => "traj1",
            Trajectory::Translation => "traj2",
        }
    }

    pub fn spec(self) -> TrialSpec {
        match self {
            Trajectory::Swing => TrialSpec::swing(50.0, 1.0, 2.0, 0),
            Trajectory::Translation => TrialSpec::translation(Self::TRANSLATION_DURATION, 0),
        }
    }
}

/// Clean ground truth and its noisy measurement.
#[derive(Debug, Clone)]
pub struct EvalData {
    pub name: String,
    pub clean: Dataset,
    pub noisy: Dataset,
}

/// Simulates `traj` and adds noise with seed `EVAL_NOISE_SEED + index`.
pub fn trajectory_data(traj: Trajectory, settings: &SimSettings, noise_fraction: f64) -> Result<EvalData> {
    let clean = Dataset::new(simulate_trial(&traj.spec(), settings)?, settings.rate);
    let seed = EVAL_NOISE_SEED + u64::from(traj.index());
    let noisy = add_noise(&clean, noise_fraction, seed, &settings.pob);
    Ok(EvalData {
        name: traj.name().to_string(),
        clean,
        noisy,
    })
}

/// Accuracy of one estimator on one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub label: String,
    pub mode: &'static str,
    pub trajectory: String,
    pub mse: f64,
    /// NaN when the phase has no samples.
    pub stick_mse: f64,
    pub slip_mse: f64,
    pub stick_samples: usize,
    pub slip_samples: usize,
    pub correlation: f64,
    pub wall_clock: f64,
    /// Set when the closed-loop simulation blew up.
    pub failed: bool,
    pub times: Vec<f64>,
    pub truth: Vec<f64>,
    pub estimate: Vec<f64>,
}

pub const REPORT_CSV_HEADER: &str =
    "label,mode,trajectory,mse,stick_mse,slip_mse,stick_samples,slip_samples,correlation,wall_clock_s,failed";

fn mean_sq(pairs: impl Iterator<Item = (f64, f64)>) -> (f64, usize) {
    let (mut s, mut n) = (0.0, 0);
    for (a, b) in pairs {
        s += (a - b) * (a - b);
        n += 1;
    }
    (if n > 0 { s / n as f64 } else { f64::NAN }, n)
}

/// Pearson correlation; NaN if either series is constant.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n < 2 {
        return f64::NAN;
    }
    let ma = a[..n].iter().sum::<f64>() / n as f64;
    let mb = b[..n].iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (da, db) = (a[i] - ma, b[i] - mb);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa == 0.0 || sbb == 0.0 {
        return f64::NAN;
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}

impl EvalReport {
    /// Scores `estimate` against `truth`; `velocity` decides the phase of
    /// each sample.
    pub fn from_series(
        label: &str,
        mode: &'static str,
        trajectory: &str,
        times: Vec<f64>,
        truth: Vec<f64>,
        estimate: Vec<f64>,
        velocity: &[f64],
    ) -> Result<Self> {
        let n = truth.len();
        if estimate.len() != n || velocity.len() != n || times.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: estimate.len() });
        }
        let pairs = || truth.iter().copied().zip(estimate.iter().copied());
        let (mse, _) = mean_sq(pairs());
        let stick = |i: usize| velocity[i].abs() < STICK_VELOCITY;
        let (stick_mse, stick_samples) = mean_sq(pairs().enumerate().filter(|(i, _)| stick(*i)).map(|(_, p)| p));
        let (slip_mse, slip_samples) = mean_sq(pairs().enumerate().filter(|(i, _)| !stick(*i)).map(|(_, p)| p));
        Ok(Self {
            label: label.to_string(),
            mode,
            trajectory: trajectory.to_string(),
            mse,
            stick_mse,
            slip_mse,
            stick_samples,
            slip_samples,
            correlation: correlation(&truth, &estimate),
            wall_clock: 0.0,
            failed: false,
            times,
            truth,
            estimate,
        })
    }

    fn failure(label: &str, mode: &'static str, trajectory: &str) -> Self {
        Self {
            label: label.to_string(),
            mode,
            trajectory: trajectory.to_string(),
            mse: f64::NAN,
            stick_mse: f64::NAN,
            slip_mse: f64::NAN,
            stick_samples: 0,
            slip_samples: 0,
            correlation: f64::NAN,
            wall_clock: 0.0,
            failed: true,
            times: Vec::new(),
            truth: Vec::new(),
            estimate: Vec::new(),
        }
    }

    /// Stick-phase MSE over slip-phase MSE.
    pub fn stick_slip_ratio(&self) -> f64 {
        self.stick_mse / self.slip_mse
    }

    pub fn csv_row(&self, timing: bool) -> String {
        format!(
            "{},{},{},{:.10e},{:.10e},{:.10e},{},{},{:.10e},{:.3},{}",
            self.label,
            self.mode,
            self.trajectory,
            self.mse,
            self.stick_mse,
            self.slip_mse,
            self.stick_samples,
            self.slip_samples,
            self.correlation,
            if timing { self.wall_clock } else { 0.0 },
            self.failed
        )
    }

    /// Per-sample `t,truth,estimate`.
    pub fn series_csv(&self) -> String {
        let mut s = String::from("t,truth,estimate\n");
        for i in 0..self.times.len() {
            let _ = writeln!(s, "{:.6},{:.10e},{:.10e}", self.times[i], self.truth[i], self.estimate[i]);
        }
        s
    }
}

/// Aligned text table of reports.
pub fn summary_table(reports: &[EvalReport]) -> String {
    let mut s = format!(
        "{:<14}{:<10}{:<8}{:>12}{:>12}{:>12}{:>8}\n",
        "label", "mode", "traj", "mse", "stick", "slip", "corr"
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{:<14}{:<10}{:<8}{:>12.4e}{:>12.4e}{:>12.4e}{:>8.4}{}",
            r.label,
            r.mode,
            r.trajectory,
            r.mse,
            r.stick_mse,
            r.slip_mse,
            r.correlation,
            if r.failed { "  FAILED" } else { "" }
        );
    }
    s
}

/// Friction law used inside a closed-loop simulation.
#[derive(Debug, Clone)]
pub enum SimFriction {
    LuGre(LuGreParams<f64>),
    Learned(PinnModel<f64>),
}

impl SimFriction {
    pub fn learned<T: Scalar>(model: &PinnModel<T>) -> Self {
        SimFriction::Learned(model.cast())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InSimOptions {
    /// Integrator settings for learned models; LuGre uses the settings of
    /// the reference run.
    pub ode: OdeOptions<f64>,
    pub max_fixed_point_iters: usize,
    pub fixed_point_tol: f64,
}

impl Default for InSimOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions {
                rel_tol: 1e-6,
                abs_tol: 1e-9,
                max_steps: 2_000_000,
                max_step: None,
            },
            max_fixed_point_iters: 50,
            fixed_point_tol: 1e-10,
        }
    }
}

/// Accelerations and friction of the PoB with a learned friction model.
///
/// The PE force `σ₀ẑ + σ₁ J(u)·u̇ + σ₂v` is affine in `(ẍ_b, θ̈)` through
/// `u̇`, so it enters the mass-matrix solve directly. Variant 2 also feeds
/// `ẍ*(θ̈)` as an input, which is resolved by fixed-point iteration on `θ̈`;
/// its rate is taken with `θ⃛ = 0`.
pub fn learned_accelerations(
    model: &PinnModel<f64>,
    state: &PoBState<f64>,
    tau: f64,
    p: &PoBParams<f64>,
    opts: &InSimOptions,
) -> Result<(f64, f64, f64)> {
    let (th, w, v) = (state.theta, state.thetadot, state.xdot_b);
    let signed = normal_force_estimate(th, w, p);
    let sg = if signed < 0.0 { -1.0 } else { 1.0 };
    let f_n = signed.abs();
    let (s, c) = th.sin_cos();
    let mld = p.m_l * p.d;
    let dfn_dth = -sg * mld * w * w * s;
    let dfn_dw = 2.0 * sg * mld * w * c;
    let k = mld / p.total_mass();
    let d = model.variant.input_dim();
    let lugre = model.lugre_params();
    let (_, mut thdd) = pob_accelerations(th, w, tau, 0.0, p);
    let mut out = (0.0, 0.0, 0.0);
    for _ in 0..opts.max_fixed_point_iters.max(1) {
        let mut u = vec![v, f_n];
        if d == 3 {
            u.push(would_be_acceleration(th, w, thdd, p));
        }
        let (f0, fx, fth) = match &lugre {
            Some(lp) => {
                let uu = Array2::from_shape_fn((3, d), |(_, j)| u[j]);
                let mut rates = Array2::zeros((3, d));
                rates[[0, 1]] = dfn_dth * w;
                rates[[1, 0]] = 1.0;
                rates[[2, 1]] = dfn_dw;
                if d == 3 {
                    rates[[0, 2]] = k * w * w * w * c;
                    rates[[2, 2]] = 3.0 * k * w * s;
                }
                let (z, t) = model.output_and_rate(uu.view(), rates.view())?;
                (lp.sigma0 * z[0] + lp.sigma1 * t[0] + lp.sigma2 * v, lp.sigma1 * t[1], lp.sigma1 * t[2])
            }
            None => {
                let uu = Array2::from_shape_vec((1, d), u).expect("one row");
                (model.scaled_output(uu.view())?[0], 0.0, 0.0)
            }
        };
        let (xdd, thdd_new) = pob_accelerations_affine(th, w, tau, (f0, fx, fth), p);
        out = (xdd, thdd_new, f0 + fx * xdd + fth * thdd_new);
        let done = d == 2 || (thdd_new - thdd).abs() <= opts.fixed_point_tol * (1.0 + thdd.abs());
        thdd = thdd_new;
        if done {
            break;
        }
    }
    Ok(out)
}

/// Runs the reference trajectory closed-loop with `friction` in place of
/// the true LuGre law and compares the friction it produces with the
/// ground-truth run at the sample times. A blow-up gives a report with
/// `failed` set.
pub fn eval_in_simulation(
    label: &str,
    friction: &SimFriction,
    spec: &TrialSpec,
    trajectory: &str,
    settings: &SimSettings,
    opts: &InSimOptions,
) -> Result<EvalReport> {
    let truth = simulate_trial(spec, settings)?;
    let start = Instant::now();
    let p = settings.pob;
    let ctl = settings.controller;
    let reference = &spec.reference;
    let torque = |t: f64, s: &PoBState<f64>| ctl.torque(reference.eval(t), s.theta, s.thetadot);
    let sim = match friction {
        SimFriction::LuGre(fp) => integrate_rk45(
            |t, y, dy| {
                let s = PoBState::from_slice(y);
                dy.copy_from_slice(&pob_dynamics(&s, torque(t, &s), &p, fp).to_array(&s));
            },
            &[0.0; 5],
            (0.0, spec.duration),
            &settings.ode,
        ),
        SimFriction::Learned(m) => integrate_rk45(
            |t, y, dy| {
                let s = PoBState::from_slice(y);
                let (xdd, thdd) = learned_accelerations(m, &s, torque(t, &s), &p, opts)
                    .map_or((f64::NAN, f64::NAN), |r| (r.0, r.1));
                dy.copy_from_slice(&[s.xdot_b, xdd, s.thetadot, thdd, 0.0]);
            },
            &[0.0; 5],
            (0.0, spec.duration),
            &opts.ode,
        ),
    };
    let sol = match sim {
        Ok(sol) => sol,
        Err(Error::NonFiniteRhs { .. } | Error::StepSizeUnderflow { .. } | Error::MaxStepsExceeded { .. }) => {
            let mut r = EvalReport::failure(label, "insim", trajectory);
            r.wall_clock = start.elapsed().as_secs_f64();
            return Ok(r);
        }
        Err(e) => return Err(e),
    };
    let traj = resample(&sol, settings.rate)?;
    let n = traj.times.len().min(truth.len());
    let mut estimate = Vec::with_capacity(n);
    for k in 0..n {
        let t = traj.times[k];
        let row = traj.states.row(k);
        let s = PoBState::from_slice(row.as_slice().expect("row-major"));
        let f = match friction {
            SimFriction::LuGre(fp) => pob_dynamics(&s, torque(t, &s), &p, fp).friction,
            SimFriction::Learned(m) => learned_accelerations(m, &s, torque(t, &s), &p, opts)?.2,
        };
        estimate.push(f);
    }
    let wall = start.elapsed().as_secs_f64();
    if estimate.iter().any(|f| !f.is_finite()) {
        let mut r = EvalReport::failure(label, "insim", trajectory);
        r.wall_clock = wall;
        return Ok(r);
    }
    let truth = &truth[..n];
    let mut r = EvalReport::from_series(
        label,
        "insim",
        trajectory,
        truth.iter().map(|s| s.t).collect(),
        truth.iter().map(|s| s.f_fric_true).collect(),
        estimate,
        &truth.iter().map(|s| s.xdot_b).collect::<Vec<_>>(),
    )?;
    r.wall_clock = wall;
    Ok(r)
}

/// Per-sample estimates of `model` from the noisy measurements, scored
/// against the clean friction. Phases follow the clean velocity.
pub fn eval_online<T: Scalar>(label: &str, model: &PinnModel<T>, data: &EvalData, mode: &'static str) -> Result<EvalReport> {
    let start = Instant::now();
    let batch = Batch::<T>::from_dataset(&data.noisy, model.variant, &PoBParams::default(), false)?;
    let estimate: Vec<f64> = model.predict(&batch)?.iter().map(|f| f.as_f64()).collect();
    let wall = start.elapsed().as_secs_f64();
    let mut r = score_estimates(label, mode, data, estimate)?;
    r.wall_clock = wall;
    Ok(r)
}

/// `μ_c|F_N| sgn(v) + σ₂ v` from the noisy measurements.
pub fn eval_coulomb_viscous(label: &str, mu_c: f64, sigma2: f64, data: &EvalData, mode: &'static str) -> Result<EvalReport> {
    let estimate = data
        .noisy
        .samples
        .iter()
        .map(|s| coulomb_viscous_force(s.xdot_b, s.f_n_est, mu_c, sigma2))
        .collect();
    score_estimates(label, mode, data, estimate)
}

fn score_estimates(label: &str, mode: &'static str, data: &EvalData, estimate: Vec<f64>) -> Result<EvalReport> {
    let c = &data.clean.samples;
    EvalReport::from_series(
        label,
        mode,
        &data.name,
        c.iter().map(|s| s.t).collect(),
        c.iter().map(|s| s.f_fric_true).collect(),
        estimate,
        &c.iter().map(|s| s.xdot_b).collect::<Vec<_>>(),
    )
}

/// Pull on the SDoB's bottom mass, `F_ext = A sin²(π f t)`, with the top
/// mass released from a vertical offset so the normal force rings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdobTrajectory {
    pub duration: f64,
    pub force_amp: f64,
    pub freq: f64,
    /// Initial top-mass offset, m.
    pub y2_0: f64,
}

impl Default for SdobTrajectory {
    fn default() -> Self {
        Self {
            duration: 3.0,
            force_amp: 9.0,
            freq: 1.0,
            y2_0: 0.0015,
        }
    }
}

impl SdobTrajectory {
    pub fn force(&self, t: f64) -> f64 {
        let s = (std::f64::consts::PI * self.freq * t).sin();
        self.force_amp * s * s
    }
}

/// Ground-truth SDoB run recorded as PoB-shaped samples: `x_b`, `ẋ_b`,
/// `ẍ_b` hold the bottom mass, `f_n_est` the normal force, `xddot_star`
/// the frictionless acceleration and `tau` the pull force. Pendulum
/// columns are zero.
pub fn simulate_sdob(
    traj: &SdobTrajectory,
    p: &SDoBParams<f64>,
    fric: &LuGreParams<f64>,
    rate: f64,
    ode: &OdeOptions<f64>,
) -> Result<Dataset> {
    if !(traj.duration > 0.0) {
        return Err(Error::InvalidArgument("SDoB duration must be positive".into()));
    }
    let sol = integrate_rk45(
        |t, y, dy| {
            let s = SDoBState::from_slice(y);
            dy.copy_from_slice(&sdob_dynamics(&s, traj.force(t), p, fric).to_array(&s));
        },
        &[0.0, 0.0, traj.y2_0, 0.0, 0.0],
        (0.0, traj.duration),
        ode,
    )?;
    let sampled = resample(&sol, rate)?;
    let samples = sampled
        .times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let row = sampled.states.row(k);
            let s = SDoBState::from_slice(row.as_slice().expect("row-major"));
            let f_ext = traj.force(t);
            let d = sdob_dynamics(&s, f_ext, p, fric);
            Sample {
                t,
                trial_id: 0,
                x_b: s.x1,
                xdot_b: s.xdot1,
                xddot_b: d.xddot1,
                tau: f_ext,
                f_n_est: d.f_n,
                xddot_star: sdob_would_be_acceleration(f_ext, p),
                f_fric_true: d.friction,
                z_true: s.z,
                ..Sample::default()
            }
        })
        .collect();
    Ok(Dataset::new(samples, rate))
}

/// Gaussian noise at `fraction` of each measured SDoB channel's standard
/// deviation.
pub fn sdob_add_noise(clean: &Dataset, fraction: f64, seed: u64) -> Dataset {
    type Get = fn(&Sample) -> f64;
    type Set = fn(&mut Sample) -> &mut f64;
    const CHANNELS: [(Get, Set); 5] = [
        (|s| s.x_b, |s| &mut s.x_b),
        (|s| s.xdot_b, |s| &mut s.xdot_b),
        (|s| s.xddot_b, |s| &mut s.xddot_b),
        (|s| s.f_n_est, |s| &mut s.f_n_est),
        (|s| s.xddot_star, |s| &mut s.xddot_star),
    ];
    let mut out = clean.clone();
    out.noise_fraction = fraction;
    out.seed = seed;
    if fraction <= 0.0 || clean.is_empty() {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (get, set) in CHANNELS {
        let col = clean.column(get);
        let m = col.iter().sum::<f64>() / col.len() as f64;
        let sd = fraction * (col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / col.len() as f64).sqrt();
        if sd == 0.0 {
            continue;
        }
        let normal = Normal::new(0.0, sd).expect("finite standard deviation");
        for s in &mut out.samples {
            *set(s) += normal.sample(&mut rng);
        }
    }
    for s in &mut out.samples {
        s.f_n_est = s.f_n_est.abs();
    }
    out
}

/// SDoB pull data with held-out noise.
pub fn sdob_data(traj: &SdobTrajectory, p: &SDoBParams<f64>, settings: &SimSettings, noise_fraction: f64) -> Result<EvalData> {
    let clean = simulate_sdob(traj, p, &settings.friction, settings.rate, &settings.ode)?;
    let noisy = sdob_add_noise(&clean, noise_fraction, EVAL_NOISE_SEED + 10);
    Ok(EvalData {
        name: "sdob".to_string(),
        clean,
        noisy,
    })
}

/// Model whose sliding friction is mapped over a grid.
#[derive(Debug, Clone, Copy)]
pub enum SteadyModel<'a, T> {
    Reference(LuGreParams<f64>),
    Learned(&'a PinnModel<T>),
}

/// Sliding friction on a `(F_N, v)` grid, one row per normal force. Black
/// boxes are queried directly (with `ẍ* = 0` for variant 2); PE models and
/// the reference use the LuGre steady state of their parameters.
pub fn steady_state_map<T: Scalar>(model: SteadyModel<'_, T>, v_grid: &[f64], fn_grid: &[f64]) -> Result<Array2<f64>> {
    if v_grid.is_empty() || fn_grid.is_empty() {
        return Err(Error::InvalidArgument("steady-state grids must be non-empty".into()));
    }
    if v_grid.iter().any(|&v| v == 0.0 || !v.is_finite()) {
        return Err(Error::InvalidArgument("steady-state velocities must be finite and nonzero".into()));
    }
    let mut out = Array2::zeros((fn_grid.len(), v_grid.len()));
    let steady = |p: &LuGreParams<f64>, out: &mut Array2<f64>| {
        for (i, &f_n) in fn_grid.iter().enumerate() {
            for (j, &v) in v_grid.iter().enumerate() {
                out[[i, j]] = lugre_steady_state_force(v, f_n, p).force;
            }
        }
    };
    match model {
        SteadyModel::Reference(p) => steady(&p, &mut out),
        SteadyModel::Learned(m) => match m.lugre_params() {
            Some(p) => steady(&p.cast(), &mut out),
            None => {
                let d = m.variant.input_dim();
                let rows = fn_grid.len() * v_grid.len();
                let u = Array2::from_shape_fn((rows, d), |(r, c)| match c {
                    0 => T::lit(v_grid[r % v_grid.len()]),
                    1 => T::lit(fn_grid[r / v_grid.len()]),
                    _ => T::zero(),
                });
                let f = m.scaled_output(u.view())?;
                for (r, v) in f.iter().enumerate() {
                    out[[r / v_grid.len(), r % v_grid.len()]] = v.as_f64();
                }
            }
        },
    }
    Ok(out)
}

/// Long-format `f_n,v,force` CSV of a steady-state map.
pub fn steady_map_csv(v_grid: &[f64], fn_grid: &[f64], map: &Array2<f64>) -> String {
    let mut s = String::from("f_n,v,force\n");
    for (i, f_n) in fn_grid.iter().enumerate() {
        for (j, v) in v_grid.iter().enumerate() {
            let _ = writeln!(s, "{f_n:.6e},{v:.6e},{:.10e}", map[[i, j]]);
        }
    }
    s
}

/// Evenly spaced grid from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// One method on the speed/accuracy plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedAccuracyRow {
    pub method: String,
    pub t_comp: f64,
    pub mse: f64,
}

/// Rows no other row beats in both time and error.
pub fn pareto_front(rows: &[SpeedAccuracyRow]) -> Vec<bool> {
    rows.iter()
        .map(|r| {
            !rows.iter().any(|o| {
                o.t_comp <= r.t_comp && o.mse <= r.mse && (o.t_comp < r.t_comp || o.mse < r.mse)
            })
        })
        .collect()
}

pub const PARETO_CSV_HEADER: &str = "method,t_comp_s,mse,pareto";

pub fn speed_accuracy_csv(rows: &[SpeedAccuracyRow]) -> String {
    let front = pareto_front(rows);
    let mut s = format!("{PARETO_CSV_HEADER}\n");
    for (r, f) in rows.iter().zip(front) {
        let _ = writeln!(s, "{},{:.3},{:.10e},{}", r.method, r.t_comp, r.mse, f);
    }
    s
}

/// Closed-loop friction MSE of a LuGre law with `params` on `traj`, the
/// accuracy axis for identified parameter sets.
pub fn lugre_in_sim_mse(params: &LuGreParams<f64>, traj: Trajectory, settings: &SimSettings) -> Result<f64> {
    let r = eval_in_simulation(
        "lugre",
        &SimFriction::LuGre(*params),
        &traj.spec(),
        traj.name(),
        settings,
        &InSimOptions::default(),
    )?;
    Ok(if r.failed { f64::INFINITY } else { r.mse })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correlation_basics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((correlation(&a, &[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-12);
        assert!((correlation(&a, &[-1.0, -2.0, -3.0, -4.0]) + 1.0).abs() < 1e-12);
        assert!(correlation(&a, &[1.0; 4]).is_nan());
    }

    #[test]
    fn report_phase_split() {
        let r = EvalReport::from_series(
            "x",
            "online",
            "t",
            vec![0.0, 1.0, 2.0, 3.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![1.0, 1.0, 2.0, 0.0],
            &[0.0, 1e-4, 0.5, -0.5],
        )
        .unwrap();
        assert_eq!((r.stick_samples, r.slip_samples), (2, 2));
        assert!((r.stick_mse - 1.0).abs() < 1e-15);
        assert!((r.slip_mse - 2.0).abs() < 1e-15);
        assert!((r.mse - 1.5).abs() < 1e-15);
        assert!((r.stick_slip_ratio() - 0.5).abs() < 1e-15);
        assert_eq!(r.csv_row(false).split(',').count(), REPORT_CSV_HEADER.split(',').count());
    }

    #[test]
    fn reference_steady_map_closed_form() {
        let p = LuGreParams::ground_truth();
        let map = steady_state_map::<f64>(SteadyModel::Reference(p), &[1.0, -1.0, 0.5], &[14.715, 0.0]).unwrap();
        // μ_c F_N + (μ_s − μ_c) F_N e^{−(v/v_s)²} + σ₂ v at 1 m/s
        assert!((map[[0, 0]] - 4.8145).abs() < 1e-12);
        assert_eq!(map[[0, 1]], -map[[0, 0]]);
        assert!((map[[1, 2]] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn steady_map_rejects_zero_velocity() {
        let p = LuGreParams::ground_truth();
        assert!(steady_state_map::<f64>(SteadyModel::Reference(p), &[0.0], &[1.0]).is_err());
        assert!(steady_state_map::<f64>(SteadyModel::Reference(p), &[], &[1.0]).is_err());
    }

    #[test]
    fn pareto_marks_nondominated() {
        let row = |m: &str, t, e| SpeedAccuracyRow { method: m.into(), t_comp: t, mse: e };
        let rows = [row("a", 1.0, 3.0), row("b", 2.0, 1.0), row("c", 3.0, 2.0), row("d", 1.0, 3.0)];
        assert_eq!(pareto_front(&rows), vec![true, true, false, true]);
        assert_eq!(pareto_front(&rows[..1]), vec![true]);
        assert_eq!(speed_accuracy_csv(&rows).lines().count(), 5);
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert!(linspace(0.0, 1.0, 0).is_empty());
    }

    #[test]
    fn trajectory_indices() {
        for t in [Trajectory::Swing, Trajectory::Translation] {
            assert_eq!(Trajectory::from_index(t.index()).unwrap(), t);
        }
        assert!(Trajectory::from_index(3).is_err());
    }

    #[test]
    fn sdob_noise_keeps_truth_columns() {
        let s = SimSettings::default();
        let traj = SdobTrajectory { duration: 0.5, ..Default::default() };
        let clean = simulate_sdob(&traj, &SDoBParams::default(), &s.friction, s.rate, &s.ode).unwrap();
        let noisy = sdob_add_noise(&clean, 0.05, 3);
        for (a, b) in clean.samples.iter().zip(&noisy.samples) {
            assert_eq!(a.f_fric_true, b.f_fric_true);
            assert_eq!(a.z_true, b.z_true);
            assert!(b.f_n_est >= 0.0);
        }
        assert_ne!(clean.samples[10].xdot_b, noisy.samples[10].xdot_b);
    }
}
