//! Classical LuGre identification: a shared simulation-error objective and
//! three optimizers (Nelder–Mead, a real-coded genetic algorithm and
//! Levenberg–Marquardt) working on log-parameters.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::datagen::Dataset;
use crate::error::{Error, Result};
use crate::friction::{lugre_force, lugre_zdot, sign, stribeck_g, LuGreParams, PARAM_NAMES};
use crate::numerics::hermite_cubic;
use crate::pinn::sample_target;
use crate::systems::{normal_force_estimate, PoBParams};

/// Objective value returned when the bristle simulation is not finite.
pub const PENALTY: f64 = 1e12;

pub const DEFAULT_SUBSTEPS: usize = 4;

/// One step of `ż = −a (z − z_ss(t))` with `a` frozen at the midpoint and
/// `z_ss = v / a` varying linearly between the endpoints, solved exactly.
/// Stable for any `σ₀|v|/g`.
pub fn bristle_step(ends: [(f64, f64); 3], z: f64, dt: f64, p: &LuGreParams<f64>) -> f64 {
    let rate = |(v, f_n): (f64, f64)| {
        let g = stribeck_g(v, f_n, p);
        if g > 0.0 {
            Some((p.sigma0 * v.abs() / g, sign(v) * g / p.sigma0))
        } else {
            None
        }
    };
    let [start, mid, end] = ends;
    let Some((a, _)) = rate(mid) else {
        return z + mid.0 * dt;
    };
    let ad = a * dt;
    if ad < 1e-6 {
        return z + (mid.0 - a * z) * dt;
    }
    let zs0 = rate(start).map_or(0.0, |r| r.1);
    let zs1 = rate(end).map_or(0.0, |r| r.1);
    let slope = (zs1 - zs0) / dt;
    let e = (-ad).exp();
    zs1 - slope / a + (z - zs0 + slope / a) * e
}

#[derive(Debug, Clone)]
struct Trial {
    v: Vec<f64>,
    a: Vec<f64>,
    f_n: Vec<f64>,
    theta: Vec<f64>,
    thetadot: Vec<f64>,
    thetaddot: Vec<f64>,
    target: Vec<f64>,
}

/// Mean squared error between the friction predicted by simulating the
/// bristle state along the measured velocity and the friction implied by
/// the equation of motion.
#[derive(Debug, Clone)]
pub struct IdentObjective {
    trials: Vec<Trial>,
    dt: f64,
    len: usize,
    pob: PoBParams<f64>,
    /// Bristle updates per sample interval.
    pub substeps: usize,
}

impl IdentObjective {
    pub fn new(ds: &Dataset, pob: &PoBParams<f64>) -> Result<Self> {
        if ds.is_empty() {
            return Err(Error::TooFewSamples { needed: 1, got: 0 });
        }
        let trials = ds
            .trials()
            .into_iter()
            .map(|tr| Trial {
                v: tr.iter().map(|s| s.xdot_b).collect(),
                a: tr.iter().map(|s| s.xddot_b).collect(),
                f_n: tr.iter().map(|s| s.f_n_est).collect(),
                theta: tr.iter().map(|s| s.theta).collect(),
                thetadot: tr.iter().map(|s| s.thetadot).collect(),
                thetaddot: tr.iter().map(|s| s.thetaddot).collect(),
                target: tr.iter().map(|s| sample_target(s, pob)).collect(),
            })
            .collect();
        Ok(Self {
            trials,
            dt: ds.dt(),
            len: ds.len(),
            pob: *pob,
            substeps: DEFAULT_SUBSTEPS,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Equation-of-motion friction per sample.
    pub fn targets(&self) -> Vec<f64> {
        self.trials.iter().flat_map(|t| t.target.iter().copied()).collect()
    }

    /// Predicted friction per sample, or `None` if the simulation is not
    /// finite. `z` starts at 0 in every trial.
    pub fn predict(&self, p: &LuGreParams<f64>) -> Option<Vec<f64>> {
        if p.validate().is_err() {
            return None;
        }
        let h = self.dt;
        let mut out = Vec::with_capacity(self.len);
        for tr in &self.trials {
            let mut z = 0.0;
            for k in 0..tr.v.len() {
                let rate = lugre_zdot(tr.v[k], z, tr.f_n[k], p).value;
                let f = lugre_force(z, rate, tr.v[k], p);
                if !f.is_finite() {
                    return None;
                }
                out.push(f);
                if k + 1 == tr.v.len() {
                    break;
                }
                let (v0, v1, a0, a1) = (tr.v[k], tr.v[k + 1], tr.a[k], tr.a[k + 1]);
                let (th0, th1) = (tr.theta[k], tr.theta[k + 1]);
                let (w0, w1) = (tr.thetadot[k], tr.thetadot[k + 1]);
                let (al0, al1) = (tr.thetaddot[k], tr.thetaddot[k + 1]);
                let m = self.substeps;
                let dh = h / m as f64;
                // the normal force is rebuilt from interpolated pendulum states
                let at = |s: f64| {
                    let th = hermite_cubic(th0, w0, th1, w1, h, s);
                    let w = hermite_cubic(w0, al0, w1, al1, h, s);
                    (hermite_cubic(v0, a0, v1, a1, h, s), normal_force_estimate(th, w, &self.pob).abs())
                };
                for j in 0..m {
                    let s0 = j as f64 / m as f64;
                    let s1 = (j + 1) as f64 / m as f64;
                    z = bristle_step([at(s0), at(0.5 * (s0 + s1)), at(s1)], z, dh, p);
                }
                if !z.is_finite() {
                    return None;
                }
            }
        }
        Some(out)
    }

    /// `predicted − target` per sample; every entry is `sqrt(PENALTY)` when
    /// the simulation fails.
    pub fn residuals(&self, p: &LuGreParams<f64>) -> Vec<f64> {
        match self.predict(p) {
            Some(pred) => pred
                .iter()
                .zip(self.trials.iter().flat_map(|t| t.target.iter()))
                .map(|(a, b)| a - b)
                .collect(),
            None => vec![PENALTY.sqrt(); self.len],
        }
    }

    pub fn value(&self, p: &LuGreParams<f64>) -> f64 {
        let r = self.residuals(p);
        let v = r.iter().map(|e| e * e).sum::<f64>() / r.len().max(1) as f64;
        if v.is_finite() {
            v.min(PENALTY)
        } else {
            PENALTY
        }
    }

    /// Objective over `[ln σ0, ln σ1, ln σ2, ln μ_c, ln μ_s, ln v_s]`.
    pub fn value_log(&self, x: &[f64]) -> f64 {
        self.value(&LuGreParams::from_log(x))
    }

    pub fn residuals_log(&self, x: &[f64]) -> Vec<f64> {
        self.residuals(&LuGreParams::from_log(x))
    }
}

/// Outcome of a minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best value after each iteration.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iters: usize,
    /// Stop when both the simplex diameter and the value spread fall below.
    pub tol: f64,
    /// Edge of the initial simplex; `None` uses 5% of each nonzero
    /// coordinate and 2.5e-4 for zeros.
    pub initial_step: Option<f64>,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            tol: 1e-10,
            initial_step: None,
        }
    }
}

/// Downhill simplex with reflection 1, expansion 2, contraction 0.5 and
/// shrink 0.5.
pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &NelderMeadOptions) -> OptResult {
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += match opts.initial_step {
            Some(s) => s,
            None if x[i] != 0.0 => 0.05 * x[i],
            None => 2.5e-4,
        };
        simplex.push(x);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();
    let mut history = Vec::new();
    let mut converged = false;
    let mut iters = 0;
    let order = |simplex: &mut Vec<Vec<f64>>, vals: &mut Vec<f64>| {
        let mut idx: Vec<usize> = (0..vals.len()).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        *simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        *vals = idx.iter().map(|&i| vals[i]).collect();
    };
    order(&mut simplex, &mut vals);
    while iters < opts.max_iters {
        let diameter = simplex[1..]
            .iter()
            .map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let spread = (vals[n] - vals[0]).abs();
        if diameter <= opts.tol && spread <= opts.tol {
            converged = true;
            break;
        }
        iters += 1;
        let mut centroid = vec![0.0; n];
        for x in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
        } else {
            let (xc, fc) = if fr < vals[n] {
                let xc = along(-0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < vals[n].min(fr) {
                simplex[n] = xc;
                vals[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    for (xi, bi) in simplex[i].iter_mut().zip(&best) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    vals[i] = eval(&simplex[i], &mut evals);
                }
            }
        }
        order(&mut simplex, &mut vals);
        history.push(vals[0]);
    }
    OptResult {
        x: simplex[0].clone(),
        value: vals[0],
        iterations: iters,
        evaluations: evals,
        converged,
        history,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaOptions {
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    /// BLX-α blend width.
    pub blend_alpha: f64,
    pub mutation_rate: f64,
    /// Mutation standard deviation as a fraction of each bound's range.
    pub mutation_scale: f64,
    pub elitism: usize,
    pub seed: u64,
}

impl Default for GaOptions {
    fn default() -> Self {
        Self {
            population: 50,
            generations: 200,
            tournament: 3,
            blend_alpha: 0.5,
            mutation_rate: 0.1,
            mutation_scale: 0.05,
            elitism: 1,
            seed: 0,
        }
    }
}

/// Real-coded GA: tournament selection, BLX-α crossover, Gaussian
/// mutation, elitism. Children are clipped to `bounds`.
pub fn genetic_algorithm(mut f: impl FnMut(&[f64]) -> f64, bounds: &[(f64, f64)], opts: &GaOptions) -> Result<OptResult> {
    if opts.population < 10 {
        return Err(Error::InvalidArgument("population must be at least 10".into()));
    }
    if bounds.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
        return Err(Error::InvalidArgument("bounds must be finite with lo <= hi".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let population = (0..opts.population)
        .map(|_| bounds.iter().map(|&(lo, hi)| if hi > lo { rng.random_range(lo..=hi) } else { lo }).collect())
        .collect();
    genetic_algorithm_from(&mut f, bounds, population, opts, rng)
}

/// As [`genetic_algorithm`] but starting from a given population.
pub fn genetic_algorithm_with_population(
    mut f: impl FnMut(&[f64]) -> f64,
    bounds: &[(f64, f64)],
    population: Vec<Vec<f64>>,
    opts: &GaOptions,
) -> Result<OptResult> {
    let rng = ChaCha8Rng::seed_from_u64(opts.seed);
    genetic_algorithm_from(&mut f, bounds, population, opts, rng)
}

fn genetic_algorithm_from(
    f: &mut impl FnMut(&[f64]) -> f64,
    bounds: &[(f64, f64)],
    mut pop: Vec<Vec<f64>>,
    opts: &GaOptions,
    mut rng: ChaCha8Rng,
) -> Result<OptResult> {
    if pop.is_empty() || pop.iter().any(|x| x.len() != bounds.len()) {
        return Err(Error::DimensionMismatch {
            expected: bounds.len(),
            got: pop.first().map_or(0, Vec::len),
        });
    }
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let score = |v: f64| if v.is_nan() { f64::INFINITY } else { v };
    let mut evals = pop.len();
    let mut fit: Vec<f64> = pop.iter().map(|x| score(f(x))).collect();
    let mut history = Vec::with_capacity(opts.generations);
    let size = pop.len();
    for _ in 0..opts.generations {
        let mut idx: Vec<usize> = (0..size).collect();
        idx.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]));
        let mut next: Vec<Vec<f64>> = idx.iter().take(opts.elitism.min(size)).map(|&i| pop[i].clone()).collect();
        let mut next_fit: Vec<f64> = idx.iter().take(opts.elitism.min(size)).map(|&i| fit[i]).collect();
        let tournament = |rng: &mut ChaCha8Rng| -> usize {
            let mut best = rng.random_range(0..size);
            for _ in 1..opts.tournament.max(1) {
                let c = rng.random_range(0..size);
                if fit[c] < fit[best] {
                    best = c;
                }
            }
            best
        };
        while next.len() < size {
            let a = tournament(&mut rng);
            let b = tournament(&mut rng);
            let mut child: Vec<f64> = pop[a]
                .iter()
                .zip(&pop[b])
                .map(|(&x, &y)| {
                    let (lo, hi) = (x.min(y), x.max(y));
                    let d = hi - lo;
                    if d > 0.0 {
                        rng.random_range(lo - opts.blend_alpha * d..=hi + opts.blend_alpha * d)
                    } else {
                        lo
                    }
                })
                .collect();
            for (c, &(lo, hi)) in child.iter_mut().zip(bounds) {
                if rng.random::<f64>() < opts.mutation_rate {
                    *c += opts.mutation_scale * (hi - lo) * std_normal.sample(&mut rng);
                }
                *c = c.clamp(lo, hi);
            }
            next_fit.push(score(f(&child)));
            evals += 1;
            next.push(child);
        }
        pop = next;
        fit = next_fit;
        history.push(fit.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let best = (0..size).min_by(|&a, &b| fit[a].total_cmp(&fit[b])).expect("non-empty");
    Ok(OptResult {
        x: pop[best].clone(),
        value: fit[best],
        iterations: opts.generations,
        evaluations: evals,
        converged: true,
        history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iters: usize,
    /// Forward-difference step relative to `|x_i|` (absolute for zeros).
    pub rel_step: f64,
    pub initial_damping: f64,
    pub max_damping: f64,
    /// Stop on a relative cost decrease or step below this.
    pub tol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            rel_step: 1e-6,
            initial_damping: 1e-8,
            max_damping: 1e12,
            tol: 1e-10,
        }
    }
}

/// Levenberg–Marquardt on `½‖r(x)‖²` with a forward-difference Jacobian
/// and multiplicative damping `(JᵀJ + μ·diag(JᵀJ))`.
pub fn levenberg_marquardt(mut residuals: impl FnMut(&[f64]) -> Vec<f64>, x0: &[f64], opts: &LmOptions) -> OptResult {
    let n = x0.len();
    let cost = |r: &[f64]| {
        let c = r.iter().map(|e| e * e).sum::<f64>();
        if c.is_finite() {
            c
        } else {
            f64::INFINITY
        }
    };
    let mut x = x0.to_vec();
    let mut r = residuals(&x);
    let mut evals = 1;
    let m = r.len().max(1) as f64;
    let mut c = cost(&r);
    let mut mu = opts.initial_damping;
    let mut history = Vec::new();
    let mut converged = c == 0.0;
    let mut iters = 0;
    while !converged && iters < opts.max_iters {
        iters += 1;
        let rows = r.len();
        let mut jac = DMatrix::<f64>::zeros(rows, n);
        for j in 0..n {
            let h = if x[j] != 0.0 { opts.rel_step * x[j].abs() } else { opts.rel_step };
            let mut xp = x.clone();
            xp[j] += h;
            let rp = residuals(&xp);
            evals += 1;
            for i in 0..rows {
                jac[(i, j)] = (rp[i] - r[i]) / h;
            }
        }
        let rv = DVector::from_column_slice(&r);
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * rv;
        let mut accepted = false;
        while mu <= opts.max_damping {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += mu * jtj[(k, k)].max(1e-300);
            }
            let step = a.lu().solve(&(-&jtr));
            let Some(step) = step.filter(|s| s.iter().all(|v| v.is_finite())) else {
                mu *= 10.0;
                continue;
            };
            let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rn = residuals(&xn);
            evals += 1;
            let cn = cost(&rn);
            if cn < c {
                let rel_drop = (c - cn) / c;
                let step_norm = step.norm() / (x.iter().map(|v| v * v).sum::<f64>().sqrt() + opts.tol);
                x = xn;
                r = rn;
                c = cn;
                mu = (mu / 10.0).max(1e-300);
                accepted = true;
                if rel_drop < opts.tol || step_norm < opts.tol || c == 0.0 {
                    converged = true;
                }
                break;
            }
            mu *= 10.0;
        }
        history.push(c / m);
        if !accepted {
            break;
        }
    }
    OptResult {
        x,
        value: c / m,
        iterations: iters,
        evaluations: evals,
        converged,
        history,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    NelderMead,
    Genetic,
    NonlinearLs,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::NelderMead, Method::Genetic, Method::NonlinearLs];

    pub fn name(self) -> &'static str {
        match self {
            Method::NelderMead => "nelder-mead",
            Method::Genetic => "ga",
            Method::NonlinearLs => "nls",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nelder-mead" | "nm" => Ok(Method::NelderMead),
            "ga" | "genetic" => Ok(Method::Genetic),
            "nls" | "lm" => Ok(Method::NonlinearLs),
            _ => Err(Error::InvalidArgument(format!(
                "unknown method `{s}` (expected nelder-mead, ga or nls)"
            ))),
        }
    }
}

/// Settings shared by [`identify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentConfig {
    pub start: LuGreParams<f64>,
    /// Natural-unit search box for the GA.
    pub lower: LuGreParams<f64>,
    pub upper: LuGreParams<f64>,
    pub nelder_mead: NelderMeadOptions,
    pub ga: GaOptions,
    pub lm: LmOptions,
}

impl Default for IdentConfig {
    fn default() -> Self {
        Self {
            start: LuGreParams::initial_guess(),
            lower: LuGreParams::new_unchecked(1e3, 1.0, 1e-3, 0.05, 0.05, 1e-5),
            upper: LuGreParams::new_unchecked(1e6, 1e4, 10.0, 1.0, 1.5, 1e-1),
            nelder_mead: NelderMeadOptions {
                max_iters: 3000,
                tol: 1e-6,
                initial_step: Some(0.5),
            },
            ga: GaOptions::default(),
            lm: LmOptions {
                max_iters: 100,
                ..LmOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentResult {
    pub method: Method,
    pub params: LuGreParams<f64>,
    pub objective: f64,
    pub wall_clock: f64,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
    pub history: Vec<f64>,
}

/// Runs one optimizer on `objective` in log-space.
pub fn identify(method: Method, objective: &IdentObjective, cfg: &IdentConfig) -> Result<IdentResult> {
    cfg.start.validate()?;
    let start = Instant::now();
    let x0 = cfg.start.to_log();
    let res = match method {
        Method::NelderMead => nelder_mead(|x| objective.value_log(x), &x0, &cfg.nelder_mead),
        Method::Genetic => {
            let lo = cfg.lower.to_log();
            let hi = cfg.upper.to_log();
            let bounds: Vec<(f64, f64)> = lo.iter().zip(&hi).map(|(&a, &b)| (a, b)).collect();
            genetic_algorithm(|x| objective.value_log(x), &bounds, &cfg.ga)?
        }
        Method::NonlinearLs => {
            let scale = 1.0 / (objective.len().max(1) as f64).sqrt();
            let mut r = levenberg_marquardt(
                |x| objective.residuals_log(x).into_iter().map(|e| e * scale).collect(),
                &x0,
                &cfg.lm,
            );
            r.value = objective.value_log(&r.x);
            r
        }
    };
    let params = LuGreParams::from_log(&res.x);
    Ok(IdentResult {
        method,
        objective: objective.value(&params),
        params,
        wall_clock: start.elapsed().as_secs_f64(),
        converged: res.converged,
        iterations: res.iterations,
        evaluations: res.evaluations,
        history: res.history,
    })
}

pub const IDENT_CSV_HEADER: &str = "method,sigma0,sigma1,sigma2,mu_c,mu_s,v_s,objective,wall_clock_s,converged";

impl IdentResult {
    /// One CSV row; `wall_clock_s` is 0 unless `timing`.
    pub fn csv_row(&self, timing: bool) -> String {
        csv_row(self.method.name(), &self.params, self.objective, if timing { self.wall_clock } else { 0.0 }, self.converged)
    }
}

/// Row in the [`IDENT_CSV_HEADER`] layout.
pub fn csv_row(label: &str, p: &LuGreParams<f64>, objective: f64, wall_clock: f64, converged: bool) -> String {
    let vals: Vec<String> = p.to_array().iter().map(|v| format!("{v:.10e}")).collect();
    format!("{label},{},{objective:.10e},{wall_clock:.3},{converged}", vals.join(","))
}

/// Human-readable parameter table.
pub fn param_table(rows: &[(&str, LuGreParams<f64>)]) -> String {
    let mut s = format!("{:<8}", "param");
    for (label, _) in rows {
        s.push_str(&format!("{label:>14}"));
    }
    s.push('\n');
    for (k, name) in PARAM_NAMES.iter().enumerate() {
        s.push_str(&format!("{name:<8}"));
        for (_, p) in rows {
            s.push_str(&format!("{:>14.4e}", p.to_array()[k]));
        }
        s.push('\n');
    }
    s
}
