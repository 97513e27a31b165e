//! Adaptive Dormand–Prince 5(4) integration with dense output, uniform
//! resampling, and finite differences.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    // 5th-order weights (FSAL).
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Difference between the 5th and embedded 4th order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Dense-output coefficients of the continuous extension.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Step-acceptance counters of one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Tolerances and limits for [`integrate_rk45`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_steps: usize,
    /// Upper bound on the step; `None` means the whole span.
    pub max_step: Option<T>,
}

impl<T: Scalar> Default for OdeOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-8),
            abs_tol: T::lit(1e-10),
            max_steps: 5_000_000,
            max_step: None,
        }
    }
}

impl<T: Scalar> OdeOptions<T> {
    pub fn with_tolerances(rel_tol: T, abs_tol: T) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }
}

/// Accepted steps of an integration together with the interpolation data
/// for every step.
#[derive(Debug, Clone)]
pub struct OdeSolution<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    pub stats: StepStats,
    // Per step i (between times[i] and times[i+1]): the four non-trivial
    // coefficient vectors of the continuous extension.
    dense: Vec<[Vec<T>; 4]>,
}

impl<T: Scalar> OdeSolution<T> {
    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn t0(&self) -> Option<T> {
        self.times.first().copied()
    }

    pub fn t1(&self) -> Option<T> {
        self.times.last().copied()
    }

    pub fn last_state(&self) -> Option<&[T]> {
        self.states.last().map(Vec::as_slice)
    }

    /// Interpolated state at `t`; exact at step endpoints. Times outside the
    /// span are clamped to it.
    pub fn sample(&self, t: T) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.dim()];
        self.sample_into(t, &mut out)?;
        Ok(out)
    }

    pub fn sample_into(&self, t: T, out: &mut [T]) -> Result<()> {
        let n = self.times.len();
        if n == 0 {
            return Err(Error::EmptySolution);
        }
        if t <= self.times[0] {
            out.copy_from_slice(&self.states[0]);
            return Ok(());
        }
        if t >= self.times[n - 1] {
            out.copy_from_slice(&self.states[n - 1]);
            return Ok(());
        }
        // First index with times[idx] > t; segment is idx-1.
        let idx = self.times.partition_point(|&s| s <= t);
        let seg = idx - 1;
        if self.times[seg] == t {
            out.copy_from_slice(&self.states[seg]);
            return Ok(());
        }
        let h = self.times[seg + 1] - self.times[seg];
        let s = (t - self.times[seg]) / h;
        let s1 = T::one() - s;
        let y0 = &self.states[seg];
        let [c1, c2, c3, c4] = &self.dense[seg];
        for i in 0..out.len() {
            out[i] = y0[i] + s * (c1[i] + s1 * (c2[i] + s * (c3[i] + s1 * c4[i])));
        }
        Ok(())
    }
}

/// Uniformly sampled trajectory: one row per sample time.
#[derive(Debug, Clone)]
pub struct SampledTrajectory<T> {
    pub times: Vec<T>,
    pub states: Array2<T>,
}

fn rms_norm<T: Scalar>(v: &[T], scale: &[T]) -> T {
    let n = T::from_usize(v.len().max(1)).unwrap();
    let sum: T = v.iter().zip(scale).map(|(&a, &s)| (a / s) * (a / s)).sum();
    (sum / n).sqrt()
}

fn all_finite<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// One Dormand–Prince step of size `h` from `(t, y)` with `k[0] = f(t, y)`.
/// Fills `k[1..7]` and `y_new`; returns the error estimate vector in `err`.
fn dp_step<T, F>(rhs: &mut F, t: T, y: &[T], h: T, k: &mut [Vec<T>; 7], y_new: &mut [T], err: &mut [T], tmp: &mut [T])
where
    T: Scalar,
    F: FnMut(T, &[T], &mut [T]),
{
    let n = y.len();
    for s in 1..7 {
        for i in 0..n {
            let mut acc = T::zero();
            for (j, kj) in k.iter().enumerate().take(s) {
                acc += T::lit(A[s][j]) * kj[i];
            }
            tmp[i] = y[i] + h * acc;
        }
        let ts = t + T::lit(C[s]) * h;
        let (_, rest) = k.split_at_mut(s);
        rhs(ts, tmp, &mut rest[0]);
        if s == 6 {
            y_new.copy_from_slice(tmp);
        }
    }
    for i in 0..n {
        let mut e = T::zero();
        for (s, ks) in k.iter().enumerate() {
            e += T::lit(E[s]) * ks[i];
        }
        err[i] = h * e;
    }
}

fn dense_coefficients<T: Scalar>(y: &[T], y_new: &[T], k: &[Vec<T>; 7], h: T) -> [Vec<T>; 4] {
    let n = y.len();
    let mut c1 = vec![T::zero(); n];
    let mut c2 = vec![T::zero(); n];
    let mut c3 = vec![T::zero(); n];
    let mut c4 = vec![T::zero(); n];
    for i in 0..n {
        let ydiff = y_new[i] - y[i];
        let bspl = h * k[0][i] - ydiff;
        c1[i] = ydiff;
        c2[i] = bspl;
        c3[i] = ydiff - h * k[6][i] - bspl;
        let mut d = T::zero();
        for (s, ks) in k.iter().enumerate() {
            d += T::lit(D[s]) * ks[i];
        }
        c4[i] = h * d;
    }
    [c1, c2, c3, c4]
}

fn initial_step<T, F>(rhs: &mut F, t0: T, y0: &[T], f0: &[T], span: T, opts: &OdeOptions<T>) -> T
where
    T: Scalar,
    F: FnMut(T, &[T], &mut [T]),
{
    let n = y0.len();
    let scale: Vec<T> = y0.iter().map(|y| opts.abs_tol + opts.rel_tol * y.abs()).collect();
    let d0 = rms_norm(y0, &scale);
    let d1 = rms_norm(f0, &scale);
    let tiny = T::lit(1e-5);
    let mut h0 = if d0 < tiny || d1 < tiny { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 };
    h0 = h0.min(span);
    let y1: Vec<T> = (0..n).map(|i| y0[i] + h0 * f0[i]).collect();
    let mut f1 = vec![T::zero(); n];
    rhs(t0 + h0, &y1, &mut f1);
    let diff: Vec<T> = (0..n).map(|i| f1[i] - f0[i]).collect();
    let d2 = rms_norm(&diff, &scale) / h0;
    let dmax = d1.max(d2);
    let h1 = if !dmax.is_finite() {
        h0 * T::lit(1e-3)
    } else if dmax <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / dmax).powf(T::lit(0.2))
    };
    (T::lit(100.0) * h0).min(h1).min(span)
}

/// Integrates `y' = rhs(t, y)` over `t_span` with adaptive Dormand–Prince
/// 5(4) steps. The error of each accepted step is below the mixed tolerance
/// `abs_tol + rel_tol * |y|` in the RMS norm.
pub fn integrate_rk45<T, F>(mut rhs: F, y0: &[T], t_span: (T, T), opts: &OdeOptions<T>) -> Result<OdeSolution<T>>
where
    T: Scalar,
    F: FnMut(T, &[T], &mut [T]),
{
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return Err(Error::InvalidArgument(format!("t1 ({t1}) must exceed t0 ({t0})")));
    }
    if !(opts.rel_tol > T::zero()) || !(opts.abs_tol > T::zero()) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    if !all_finite(y0) {
        return Err(Error::InvalidArgument("initial state is not finite".into()));
    }
    let n = y0.len();
    let span = t1 - t0;
    let h_min = T::lit(1e-12) * span;
    let h_max = opts.max_step.unwrap_or(span).min(span);
    let safety = T::lit(0.9);
    let fac_min = T::lit(0.2);
    let fac_max = T::lit(10.0);

    let mut stats = StepStats::default();
    let mut k: [Vec<T>; 7] = std::array::from_fn(|_| vec![T::zero(); n]);
    let mut y = y0.to_vec();
    let mut y_new = vec![T::zero(); n];
    let mut err = vec![T::zero(); n];
    let mut tmp = vec![T::zero(); n];
    let mut t = t0;

    rhs(t, &y, &mut k[0]);
    stats.rhs_evals += 1;
    if !all_finite(&k[0]) {
        return Err(Error::NonFiniteRhs { t: t.as_f64() });
    }
    let mut h = initial_step(&mut rhs, t, &y, &k[0].clone(), span, opts).min(h_max);
    stats.rhs_evals += 1;

    let mut sol = OdeSolution {
        times: vec![t0],
        states: vec![y.clone()],
        stats,
        dense: Vec::new(),
    };
    let mut last_rejected = false;

    while t < t1 {
        if sol.stats.accepted + sol.stats.rejected >= opts.max_steps {
            return Err(Error::MaxStepsExceeded { t: t.as_f64(), max_steps: opts.max_steps });
        }
        let remaining = t1 - t;
        // Land exactly on t1 without leaving a sliver step.
        if h >= remaining || remaining - h < h_min {
            h = remaining;
        }
        if h < h_min && h < remaining {
            return Err(Error::StepSizeUnderflow { t: t.as_f64() });
        }
        dp_step(&mut rhs, t, &y, h, &mut k, &mut y_new, &mut err, &mut tmp);
        sol.stats.rhs_evals += 6;

        let finite = all_finite(&y_new) && all_finite(&k[6]) && all_finite(&err);
        let scale: Vec<T> = (0..n)
            .map(|i| opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs()))
            .collect();
        let err_norm = if finite { rms_norm(&err, &scale) } else { T::infinity() };

        if err_norm <= T::one() {
            let t_new = if h == remaining { t1 } else { t + h };
            sol.dense.push(dense_coefficients(&y, &y_new, &k, h));
            sol.times.push(t_new);
            sol.states.push(y_new.clone());
            sol.stats.accepted += 1;
            t = t_new;
            y.copy_from_slice(&y_new);
            let (first, rest) = k.split_at_mut(1);
            first[0].copy_from_slice(&rest[5]);
            let mut fac = if err_norm == T::zero() {
                fac_max
            } else {
                (safety * err_norm.powf(T::lit(-0.2))).min(fac_max).max(fac_min)
            };
            if last_rejected {
                fac = fac.min(T::one());
            }
            last_rejected = false;
            h = (h * fac).min(h_max);
        } else {
            sol.stats.rejected += 1;
            last_rejected = true;
            let fac = if err_norm.is_finite() {
                (safety * err_norm.powf(T::lit(-0.2))).max(fac_min)
            } else {
                T::lit(0.1)
            };
            h *= fac;
            if h < h_min {
                return Err(Error::StepSizeUnderflow { t: t.as_f64() });
            }
        }
    }
    Ok(sol)
}

/// Dormand–Prince 5th-order solution with `n_steps` equal steps and no error
/// control. Used for convergence-order checks.
pub fn integrate_dp5_fixed<T, F>(mut rhs: F, y0: &[T], t_span: (T, T), n_steps: usize) -> Result<OdeSolution<T>>
where
    T: Scalar,
    F: FnMut(T, &[T], &mut [T]),
{
    let (t0, t1) = t_span;
    if !(t1 > t0) || n_steps == 0 {
        return Err(Error::InvalidArgument("need t1 > t0 and at least one step".into()));
    }
    let n = y0.len();
    let h = (t1 - t0) / T::from_usize(n_steps).unwrap();
    let mut k: [Vec<T>; 7] = std::array::from_fn(|_| vec![T::zero(); n]);
    let mut y = y0.to_vec();
    let mut y_new = vec![T::zero(); n];
    let mut err = vec![T::zero(); n];
    let mut tmp = vec![T::zero(); n];
    let mut sol = OdeSolution {
        times: vec![t0],
        states: vec![y.clone()],
        stats: StepStats::default(),
        dense: Vec::new(),
    };
    rhs(t0, &y, &mut k[0]);
    sol.stats.rhs_evals += 1;
    for step in 0..n_steps {
        let t = t0 + h * T::from_usize(step).unwrap();
        dp_step(&mut rhs, t, &y, h, &mut k, &mut y_new, &mut err, &mut tmp);
        sol.stats.rhs_evals += 6;
        if !all_finite(&y_new) {
            return Err(Error::NonFiniteRhs { t: t.as_f64() });
        }
        sol.dense.push(dense_coefficients(&y, &y_new, &k, h));
        let t_new = if step + 1 == n_steps { t1 } else { t + h };
        sol.times.push(t_new);
        sol.states.push(y_new.clone());
        sol.stats.accepted += 1;
        y.copy_from_slice(&y_new);
        let (first, rest) = k.split_at_mut(1);
        first[0].copy_from_slice(&rest[5]);
    }
    Ok(sol)
}

/// Number of uniform samples at `rate` over `span` seconds:
/// `floor(span * rate) + 1`, robust to representation error in `span`.
pub fn sample_count(span: f64, rate: f64) -> usize {
    ((span * rate) + 1e-9).floor() as usize + 1
}

/// Samples the dense output at `t0, t0 + 1/rate, ...`.
pub fn resample<T: Scalar>(solution: &OdeSolution<T>, rate: T) -> Result<SampledTrajectory<T>> {
    let (t0, t1) = match (solution.t0(), solution.t1()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::EmptySolution),
    };
    if !(rate > T::zero()) {
        return Err(Error::InvalidArgument("rate must be positive".into()));
    }
    let span = t1 - t0;
    if span.as_f64() * rate.as_f64() < 1.0 - 1e-9 {
        return Err(Error::InvalidArgument("solution spans less than one sample period".into()));
    }
    let count = sample_count(span.as_f64(), rate.as_f64());
    let dim = solution.dim();
    let mut states = Array2::zeros((count, dim));
    let mut times = Vec::with_capacity(count);
    let mut row = vec![T::zero(); dim];
    for k in 0..count {
        // Multiply rather than accumulate to avoid drift.
        let t = (t0 + T::from_usize(k).unwrap() / rate).min(t1);
        solution.sample_into(t, &mut row)?;
        for (j, v) in row.iter().enumerate() {
            states[[k, j]] = *v;
        }
        times.push(t);
    }
    Ok(SampledTrajectory { times, states })
}

/// Central differences in the interior, one-sided first-order differences at
/// both endpoints.
pub fn finite_diff_central<T: Scalar>(signal: &[T], dt: T) -> Result<Vec<T>> {
    let n = signal.len();
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: n });
    }
    if !(dt > T::zero()) {
        return Err(Error::InvalidArgument("dt must be positive".into()));
    }
    let two_dt = dt + dt;
    let mut out = Vec::with_capacity(n);
    out.push((signal[1] - signal[0]) / dt);
    for i in 1..n - 1 {
        out.push((signal[i + 1] - signal[i - 1]) / two_dt);
    }
    out.push((signal[n - 1] - signal[n - 2]) / dt);
    Ok(out)
}

/// Cubic Hermite interpolation on `[0, h]` at fraction `s` given endpoint
/// values and slopes.
#[inline]
pub fn hermite_cubic<T: Scalar>(y0: T, d0: T, y1: T, d1: T, h: T, s: T) -> T {
    let s2 = s * s;
    let s3 = s2 * s;
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = three * s2 - two * s3;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn decay(_: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = -y[0];
    }

    #[test]
    fn exponential_decay() {
        let opts = OdeOptions::with_tolerances(1e-9, 1e-12);
        let sol = integrate_rk45(decay, &[1.0], (0.0, 1.0), &opts).unwrap();
        assert_abs_diff_eq!(sol.last_state().unwrap()[0], (-1.0f64).exp(), epsilon = 1e-7);
        assert_eq!(sol.t1(), Some(1.0));
        assert_eq!(sol.t0(), Some(0.0));
    }

    #[test]
    fn constant_solution_is_exact() {
        let sol = integrate_rk45(|_, _, dy: &mut [f64]| dy[0] = 0.0, &[5.0], (0.0, 10.0), &OdeOptions::default()).unwrap();
        assert_eq!(sol.last_state().unwrap()[0], 5.0);
    }

    #[test]
    fn harmonic_oscillator_full_period() {
        let sol = integrate_rk45(
            |_, y: &[f64], dy: &mut [f64]| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            &[1.0, 0.0],
            (0.0, 2.0 * std::f64::consts::PI),
            &OdeOptions::default(),
        )
        .unwrap();
        let y = sol.last_state().unwrap();
        assert_abs_diff_eq!(y[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(y[1], 0.0, epsilon = 1e-6);
    }

    #[test]
    fn times_strictly_increasing() {
        let sol = integrate_rk45(decay, &[1.0], (0.0, 3.0), &OdeOptions::default()).unwrap();
        assert!(sol.times.windows(2).all(|w| w[1] > w[0]));
        assert!(sol.states.iter().all(|s| s.iter().all(|x| x.is_finite())));
    }

    #[test]
    fn rejects_bad_span_and_tolerance() {
        assert!(integrate_rk45(decay, &[1.0], (1.0, 1.0), &OdeOptions::default()).is_err());
        let bad = OdeOptions::with_tolerances(0.0, 1e-9);
        assert!(integrate_rk45(decay, &[1.0], (0.0, 1.0), &bad).is_err());
    }

    #[test]
    fn blow_up_reports_last_valid_time() {
        // y' = y^2 from y=1 blows up at t = 1.
        let err = integrate_rk45(|_, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0], &[1.0], (0.0, 2.0), &OdeOptions::default())
            .unwrap_err();
        match err {
            Error::StepSizeUnderflow { t } | Error::NonFiniteRhs { t } => assert!(t > 0.9 && t < 1.0 + 1e-6, "t = {t}"),
            Error::MaxStepsExceeded { t, .. } => assert!(t > 0.9 && t < 1.0 + 1e-6),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_finite_rhs_is_an_error() {
        let err = integrate_rk45(|_, _, dy: &mut [f64]| dy[0] = f64::NAN, &[1.0], (0.0, 1.0), &OdeOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteRhs { .. }));
    }

    #[test]
    fn dense_output_exact_at_step_endpoints() {
        let sol = integrate_rk45(decay, &[1.0], (0.0, 2.0), &OdeOptions::with_tolerances(1e-6, 1e-9)).unwrap();
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert_eq!(sol.sample(*t).unwrap(), *y);
        }
    }

    #[test]
    fn dense_output_is_accurate_between_steps() {
        let sol = integrate_rk45(decay, &[1.0], (0.0, 2.0), &OdeOptions::with_tolerances(1e-10, 1e-12)).unwrap();
        for i in 0..200 {
            let t = i as f64 * 0.01 + 0.003;
            assert_abs_diff_eq!(sol.sample(t).unwrap()[0], (-t).exp(), epsilon = 1e-8);
        }
    }

    #[test]
    fn fixed_step_convergence_order() {
        let err = |n: usize| {
            let sol = integrate_dp5_fixed(decay, &[1.0], (0.0, 1.0), n).unwrap();
            (sol.last_state().unwrap()[0] - (-1.0f64).exp()).abs()
        };
        let order = (err(8) / err(16)).log2();
        assert!(order >= 4.5, "order {order}");
    }

    #[test]
    fn tighter_tolerance_does_not_increase_error() {
        let err = |rtol: f64| {
            let sol = integrate_rk45(decay, &[1.0], (0.0, 1.0), &OdeOptions::with_tolerances(rtol, 1e-14)).unwrap();
            (sol.last_state().unwrap()[0] - (-1.0f64).exp()).abs()
        };
        let mut prev = err(1e-4);
        let mut rtol = 1e-4;
        while rtol > 1e-10 {
            rtol *= 0.5;
            let e = err(rtol);
            assert!(e <= prev * 1.5 + 1e-15, "rtol {rtol}: {e} > {prev}");
            prev = prev.min(e);
        }
    }

    #[test]
    fn resample_counts_and_identity() {
        let sol = integrate_rk45(decay, &[1.0], (0.0, 2.0), &OdeOptions::default()).unwrap();
        let s = resample(&sol, 400.0).unwrap();
        assert_eq!(s.times.len(), 801);
        assert_eq!(s.states.nrows(), 801);
        assert_eq!(*s.times.last().unwrap(), 2.0);

        let fixed = integrate_dp5_fixed(decay, &[1.0], (0.0, 1.0), 400).unwrap();
        let r = resample(&fixed, 400.0).unwrap();
        for (k, y) in fixed.states.iter().enumerate() {
            assert_abs_diff_eq!(r.states[[k, 0]], y[0], epsilon = 1e-15);
        }
    }

    #[test]
    fn resample_independent_of_step_history() {
        let a = integrate_rk45(decay, &[1.0], (0.0, 2.0), &OdeOptions::with_tolerances(1e-10, 1e-13)).unwrap();
        let mut opts = OdeOptions::with_tolerances(1e-10, 1e-13);
        opts.max_step = Some(1e-3);
        let b = integrate_rk45(decay, &[1.0], (0.0, 2.0), &opts).unwrap();
        let ra = resample(&a, 400.0).unwrap();
        let rb = resample(&b, 400.0).unwrap();
        for k in 0..ra.times.len() {
            assert_abs_diff_eq!(ra.states[[k, 0]], rb.states[[k, 0]], epsilon = 1e-9);
        }
    }

    #[test]
    fn resample_rejects_empty() {
        let sol: OdeSolution<f64> = OdeSolution {
            times: vec![],
            states: vec![],
            stats: StepStats::default(),
            dense: vec![],
        };
        assert!(matches!(resample(&sol, 400.0), Err(Error::EmptySolution)));
    }

    #[test]
    fn sample_count_matches_trial_protocol() {
        assert_eq!(sample_count(2.0, 400.0), 801);
        assert_eq!(5 * sample_count(2.0, 400.0) + sample_count(4.5, 400.0), 5806);
    }

    #[test]
    fn finite_differences() {
        let dt = 0.0025;
        let lin: Vec<f64> = (0..50).map(|i| i as f64 * dt).collect();
        for d in finite_diff_central(&lin, dt).unwrap() {
            assert_abs_diff_eq!(d, 1.0, epsilon = 1e-9);
        }
        // t^2 around t = 1: interior central difference is exact.
        let ts: Vec<f64> = (0..801).map(|i| i as f64 * dt).collect();
        let sq: Vec<f64> = ts.iter().map(|t| t * t).collect();
        let d = finite_diff_central(&sq, dt).unwrap();
        assert_abs_diff_eq!(d[400], 2.0, epsilon = 1e-9);
        let c = finite_diff_central(&[3.0; 10], dt).unwrap();
        assert!(c.iter().all(|&x| x == 0.0));
        assert!(matches!(finite_diff_central(&[1.0, 2.0], dt), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |t: f64| 2.0 * t * t * t - t * t + 0.5;
        let df = |t: f64| 6.0 * t * t - 2.0 * t;
        let (a, h) = (0.3, 0.2);
        for i in 0..=10 {
            let s = i as f64 / 10.0;
            assert_abs_diff_eq!(hermite_cubic(f(a), df(a), f(a + h), df(a + h), h, s), f(a + s * h), epsilon = 1e-14);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let sol = integrate_rk45(
            |_, y: &[f32], dy: &mut [f32]| dy[0] = -y[0],
            &[1.0f32],
            (0.0, 1.0),
            &OdeOptions::with_tolerances(1e-5, 1e-7),
        )
        .unwrap();
        assert!((sol.last_state().unwrap()[0] - (-1.0f32).exp()).abs() < 1e-4);
    }
}
