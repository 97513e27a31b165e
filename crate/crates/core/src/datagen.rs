//! Training and evaluation trajectories of the pendulum-on-a-box under
//! ground-truth LuGre friction, measurement noise, and the dataset CSV
//! format.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::friction::LuGreParams;
use crate::numerics::{integrate_rk45, resample, OdeOptions};
use crate::systems::{normal_force_estimate, pob_dynamics, would_be_acceleration, PoBParams, PoBState};

/// Column order of the dataset CSV.
pub const CSV_COLUMNS: [&str; 13] = [
    "t",
    "trial_id",
    "x_b",
    "xdot_b",
    "xddot_b",
    "theta",
    "thetadot",
    "thetaddot",
    "tau",
    "f_n_est",
    "xddot_star",
    "f_fric_true",
    "z_true",
];

pub const DEFAULT_RATE: f64 = 400.0;

/// One time step of a trial. `f_fric_true` and `z_true` are ground truth
/// kept for evaluation only.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sample {
    pub t: f64,
    pub trial_id: u32,
    pub x_b: f64,
    pub xdot_b: f64,
    pub xddot_b: f64,
    pub theta: f64,
    pub thetadot: f64,
    pub thetaddot: f64,
    pub tau: f64,
    /// `|F̂_N|` from the state-based normal-force estimate.
    pub f_n_est: f64,
    pub xddot_star: f64,
    pub f_fric_true: f64,
    pub z_true: f64,
}

impl Sample {
    fn to_row(self) -> [f64; 13] {
        [
            self.t,
            f64::from(self.trial_id),
            self.x_b,
            self.xdot_b,
            self.xddot_b,
            self.theta,
            self.thetadot,
            self.thetaddot,
            self.tau,
            self.f_n_est,
            self.xddot_star,
            self.f_fric_true,
            self.z_true,
        ]
    }

    /// Recomputes `f_n_est` and `xddot_star` from the (possibly noisy)
    /// states.
    pub fn refresh_derived(&mut self, p: &PoBParams<f64>) {
        self.f_n_est = normal_force_estimate(self.theta, self.thetadot, p).abs();
        self.xddot_star = would_be_acceleration(self.theta, self.thetadot, self.thetaddot, p);
    }
}

/// Ordered samples of one or more trials.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub noise_fraction: f64,
    pub seed: u64,
    pub rate: f64,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, rate: f64) -> Self {
        Self {
            samples,
            noise_fraction: 0.0,
            seed: 0,
            rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.rate
    }

    /// Contiguous runs of samples sharing a trial id.
    pub fn trials(&self) -> Vec<&[Sample]> {
        self.samples
            .chunk_by(|a, b| a.trial_id == b.trial_id)
            .collect()
    }

    /// Sum of trial durations, seconds.
    pub fn duration(&self) -> f64 {
        self.trials()
            .iter()
            .map(|tr| tr.last().unwrap().t - tr[0].t)
            .sum()
    }

    pub fn column(&self, f: impl Fn(&Sample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    /// Concatenates datasets in order; rates must agree.
    pub fn concat(parts: Vec<Dataset>) -> Result<Self> {
        let rate = parts.first().map_or(DEFAULT_RATE, |d| d.rate);
        if parts.iter().any(|d| d.rate != rate) {
            return Err(Error::InvalidArgument("datasets with different rates".into()));
        }
        let samples = parts.into_iter().flat_map(|d| d.samples).collect();
        Ok(Self::new(samples, rate))
    }
}

/// PD tracking controller on the link angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdController {
    pub kp: f64,
    pub kd: f64,
}

impl Default for PdController {
    fn default() -> Self {
        Self { kp: 50.0, kd: 5.0 }
    }
}

impl PdController {
    pub fn torque(&self, reference: (f64, f64), theta: f64, thetadot: f64) -> f64 {
        self.kp * (reference.0 - theta) + self.kd * (reference.1 - thetadot)
    }
}

/// Minimum-jerk segment between two angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub t: f64,
    pub theta: f64,
}

/// Link-angle reference `(θ_ref, θ̇_ref)` as a function of time.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    /// `A sin(2π f t)`.
    Swing { amplitude: f64, freq: f64 },
    /// Piecewise minimum-jerk moves through the waypoints, holding the last
    /// angle afterwards.
    Waypoints(Vec<Waypoint>),
}

impl Reference {
    pub fn swing_deg(amplitude_deg: f64, freq: f64) -> Self {
        Reference::Swing {
            amplitude: amplitude_deg.to_radians(),
            freq,
        }
    }

    /// Asymmetric stick-slip gait: slow forward swings the box resists,
    /// fast back swings that make it slide in `+x`, and holds in between.
    /// One cycle lasts 1.6 s after a 0.8 s lead-in.
    pub fn translation(duration: f64) -> Self {
        let amp = 30f64.to_radians();
        let mut pts = vec![
            Waypoint { t: 0.0, theta: 0.0 },
            Waypoint { t: 0.5, theta: amp },
            Waypoint { t: 0.8, theta: amp },
        ];
        let cycle = [(0.3, -amp), (0.3, -amp), (0.7, amp), (0.3, amp)];
        let mut t = 0.8;
        'cycles: loop {
            for (dt, theta) in cycle {
                if t + dt > duration + 1e-12 {
                    break 'cycles;
                }
                t += dt;
                pts.push(Waypoint { t, theta });
            }
        }
        Reference::Waypoints(pts)
    }

    pub fn eval(&self, t: f64) -> (f64, f64) {
        match self {
            Reference::Swing { amplitude, freq } => {
                let w = 2.0 * PI * freq;
                (amplitude * (w * t).sin(), amplitude * w * (w * t).cos())
            }
            Reference::Waypoints(pts) => {
                if pts.is_empty() {
                    return (0.0, 0.0);
                }
                if t <= pts[0].t {
                    return (pts[0].theta, 0.0);
                }
                for w in pts.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    if t < b.t {
                        let span = b.t - a.t;
                        let s = (t - a.t) / span;
                        let shape = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
                        let dshape = 30.0 * s * s * (1.0 - s) * (1.0 - s) / span;
                        let delta = b.theta - a.theta;
                        return (a.theta + delta * shape, delta * dshape);
                    }
                }
                (pts[pts.len() - 1].theta, 0.0)
            }
        }
    }
}

/// Everything needed to simulate one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSpec {
    pub reference: Reference,
    pub duration: f64,
    pub trial_id: u32,
}

impl TrialSpec {
    pub fn swing(amplitude_deg: f64, freq: f64, duration: f64, trial_id: u32) -> Self {
        Self {
            reference: Reference::swing_deg(amplitude_deg, freq),
            duration,
            trial_id,
        }
    }

    pub fn translation(duration: f64, trial_id: u32) -> Self {
        Self {
            reference: Reference::translation(duration),
            duration,
            trial_id,
        }
    }
}

/// Simulation settings shared by all trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub pob: PoBParams<f64>,
    pub friction: LuGreParams<f64>,
    pub controller: PdController,
    pub rate: f64,
    pub ode: OdeOptions<f64>,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            pob: PoBParams::default(),
            friction: LuGreParams::ground_truth(),
            controller: PdController::default(),
            rate: DEFAULT_RATE,
            ode: OdeOptions::default(),
        }
    }
}

/// Simulates one trial from rest and records it at `settings.rate`.
/// Accelerations, torque and friction come from evaluating the dynamics at
/// each recorded state.
pub fn simulate_trial(spec: &TrialSpec, settings: &SimSettings) -> Result<Vec<Sample>> {
    if !(spec.duration > 0.0) {
        return Err(Error::InvalidArgument("trial duration must be positive".into()));
    }
    let p = settings.pob;
    let fric = settings.friction;
    let ctl = settings.controller;
    let reference = &spec.reference;
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let s = PoBState::from_slice(y);
        let tau = ctl.torque(reference.eval(t), s.theta, s.thetadot);
        let d = pob_dynamics(&s, tau, &p, &fric);
        dy.copy_from_slice(&d.to_array(&s));
    };
    let sol = integrate_rk45(rhs, &[0.0; 5], (0.0, spec.duration), &settings.ode)?;
    let traj = resample(&sol, settings.rate)?;
    let mut out = Vec::with_capacity(traj.times.len());
    for (k, &t) in traj.times.iter().enumerate() {
        let row = traj.states.row(k);
        let s = PoBState::from_slice(row.as_slice().expect("row-major"));
        let tau = ctl.torque(reference.eval(t), s.theta, s.thetadot);
        let d = pob_dynamics(&s, tau, &p, &fric);
        let mut sample = Sample {
            t,
            trial_id: spec.trial_id,
            x_b: s.x_b,
            xdot_b: s.xdot_b,
            xddot_b: d.xddot_b,
            theta: s.theta,
            thetadot: s.thetadot,
            thetaddot: d.thetaddot,
            tau,
            f_n_est: 0.0,
            xddot_star: 0.0,
            f_fric_true: d.friction,
            z_true: s.z,
        };
        sample.refresh_derived(&p);
        out.push(sample);
    }
    Ok(out)
}

/// Constant-frequency swing trial of `duration` seconds.
pub fn generate_swing_trial(
    amplitude_deg: f64,
    freq: f64,
    duration: f64,
    trial_id: u32,
    settings: &SimSettings,
) -> Result<Vec<Sample>> {
    if !(0.0..90.0).contains(&amplitude_deg) {
        return Err(Error::InvalidArgument(format!("amplitude {amplitude_deg}° outside [0°, 90°)")));
    }
    simulate_trial(&TrialSpec::swing(amplitude_deg, freq, duration, trial_id), settings)
}

/// Translation trial; fails if the box does not end up displaced in `+x`.
pub fn generate_translation_trial(duration: f64, trial_id: u32, settings: &SimSettings) -> Result<Vec<Sample>> {
    if duration < 2.0 {
        return Err(Error::InvalidArgument("translation trial needs at least 2 s".into()));
    }
    let samples = simulate_trial(&TrialSpec::translation(duration, trial_id), settings)?;
    let dx = samples.last().unwrap().x_b - samples[0].x_b;
    if !(dx > 0.0) {
        return Err(Error::GenerationQuality(format!("net box displacement {dx} m is not positive")));
    }
    Ok(samples)
}

/// Recipe for the training set: swings at several amplitudes plus one
/// translation trial.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecipe {
    pub amplitudes_deg: Vec<f64>,
    pub freq: f64,
    pub swing_duration: f64,
    pub translation_duration: f64,
    pub noise_fraction: f64,
    pub seed: u64,
}

impl Default for DatasetRecipe {
    fn default() -> Self {
        Self {
            amplitudes_deg: vec![35.0, 42.5, 50.0, 57.5, 65.0],
            freq: 1.0,
            swing_duration: 2.0,
            translation_duration: 4.5,
            noise_fraction: 0.05,
            seed: 7,
        }
    }
}

/// Generates the clean training trials in trial-id order.
pub fn generate_clean_dataset(recipe: &DatasetRecipe, settings: &SimSettings) -> Result<Dataset> {
    let mut samples = Vec::new();
    for (i, &amp) in recipe.amplitudes_deg.iter().enumerate() {
        samples.extend(generate_swing_trial(amp, recipe.freq, recipe.swing_duration, i as u32, settings)?);
    }
    let id = recipe.amplitudes_deg.len() as u32;
    samples.extend(generate_translation_trial(recipe.translation_duration, id, settings)?);
    Ok(Dataset::new(samples, settings.rate))
}

/// Clean and noisy versions of the training set.
pub fn generate_dataset_pair(recipe: &DatasetRecipe, settings: &SimSettings) -> Result<(Dataset, Dataset)> {
    let clean = generate_clean_dataset(recipe, settings)?;
    let noisy = add_noise(&clean, recipe.noise_fraction, recipe.seed, &settings.pob);
    Ok((clean, noisy))
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt()
}

type Channel = (fn(&Sample) -> f64, fn(&mut Sample) -> &mut f64);

const MEASURED: [Channel; 7] = [
    (|s| s.x_b, |s| &mut s.x_b),
    (|s| s.xdot_b, |s| &mut s.xdot_b),
    (|s| s.xddot_b, |s| &mut s.xddot_b),
    (|s| s.theta, |s| &mut s.theta),
    (|s| s.thetadot, |s| &mut s.thetadot),
    (|s| s.thetaddot, |s| &mut s.thetaddot),
    (|s| s.tau, |s| &mut s.tau),
];

/// Adds zero-mean Gaussian noise with standard deviation
/// `fraction · std(channel)` to every measured channel, then recomputes the
/// derived inputs from the noisy states. Ground-truth columns are untouched.
pub fn add_noise(dataset: &Dataset, fraction: f64, seed: u64, p: &PoBParams<f64>) -> Dataset {
    let mut out = dataset.clone();
    out.noise_fraction = fraction;
    out.seed = seed;
    if fraction <= 0.0 || dataset.is_empty() {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (get, set) in MEASURED {
        let sd = fraction * std_dev(&dataset.column(get));
        if sd == 0.0 {
            continue;
        }
        let normal = Normal::new(0.0, sd).expect("finite standard deviation");
        for s in &mut out.samples {
            *set(s) += normal.sample(&mut rng);
        }
    }
    for s in &mut out.samples {
        s.refresh_derived(p);
    }
    out
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the dataset as CSV. A leading `#` line carries the rate, noise
/// fraction and seed.
pub fn write_csv_to<W: Write>(dataset: &Dataset, mut w: W) -> Result<()> {
    writeln!(
        w,
        "# rate={} noise_fraction={} seed={}",
        fmt_f64(dataset.rate),
        fmt_f64(dataset.noise_fraction),
        dataset.seed
    )?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_COLUMNS)?;
    let mut fields: Vec<String> = Vec::with_capacity(CSV_COLUMNS.len());
    for s in &dataset.samples {
        fields.clear();
        for (i, v) in s.to_row().iter().enumerate() {
            fields.push(if i == 1 { s.trial_id.to_string() } else { fmt_f64(*v) });
        }
        out.write_record(&fields)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_csv_to(dataset, std::io::BufWriter::new(f))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    read_csv_from(std::fs::File::open(path)?)
}

fn parse_meta(line: &str, ds: &mut Dataset) {
    for kv in line.trim_start_matches('#').split_whitespace() {
        if let Some((k, v)) = kv.split_once('=') {
            match k {
                "rate" => ds.rate = v.parse().unwrap_or(ds.rate),
                "noise_fraction" => ds.noise_fraction = v.parse().unwrap_or(0.0),
                "seed" => ds.seed = v.parse().unwrap_or(0),
                _ => {}
            }
        }
    }
}

/// Reads a dataset CSV. Columns are located by header name; a missing
/// column or an unparsable field is reported with its line number.
pub fn read_csv_from<R: Read>(mut r: R) -> Result<Dataset> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut ds = Dataset::new(Vec::new(), DEFAULT_RATE);
    let mut saw_meta = false;
    let mut body = text.as_str();
    let mut skipped = 0u64;
    while let Some(first) = body.lines().next() {
        let trimmed = first.trim();
        if !(trimmed.is_empty() || trimmed.starts_with('#')) {
            break;
        }
        if trimmed.starts_with('#') {
            parse_meta(trimmed, &mut ds);
            saw_meta = true;
        }
        body = body.get(first.len() + 1..).unwrap_or("");
        skipped += 1;
    }
    if body.trim().is_empty() {
        return Err(Error::Parse {
            line: skipped as usize + 1,
            message: "no header row".into(),
        });
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(body.as_bytes());
    let headers = rdr.headers()?.clone();
    let mut idx = [0usize; 13];
    for (c, name) in CSV_COLUMNS.iter().enumerate() {
        idx[c] = headers
            .iter()
            .position(|h| h == *name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() + skipped) as usize;
        let mut vals = [0.0f64; 13];
        for (c, &i) in idx.iter().enumerate() {
            let raw = rec.get(i).ok_or_else(|| Error::Parse {
                line,
                message: format!("missing field `{}`", CSV_COLUMNS[c]),
            })?;
            vals[c] = raw.parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid value `{raw}` for `{}`", CSV_COLUMNS[c]),
            })?;
        }
        let trial = vals[1];
        if trial < 0.0 || trial.fract() != 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("trial_id `{trial}` is not a non-negative integer"),
            });
        }
        ds.samples.push(Sample {
            t: vals[0],
            trial_id: trial as u32,
            x_b: vals[2],
            xdot_b: vals[3],
            xddot_b: vals[4],
            theta: vals[5],
            thetadot: vals[6],
            thetaddot: vals[7],
            tau: vals[8],
            f_n_est: vals[9],
            xddot_star: vals[10],
            f_fric_true: vals[11],
            z_true: vals[12],
        });
    }
    if !saw_meta && ds.samples.len() >= 2 {
        let dt = ds.samples[1].t - ds.samples[0].t;
        if dt > 0.0 {
            ds.rate = (1.0 / dt).round();
        }
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::eom_x_term;

    fn settings() -> SimSettings {
        SimSettings::default()
    }

    #[test]
    fn swing_trial_sample_count_and_closure() {
        let s = generate_swing_trial(35.0, 1.0, 2.0, 0, &settings()).unwrap();
        assert_eq!(s.len(), 801);
        let p = PoBParams::default();
        for x in &s {
            let r = eom_x_term(x.xddot_b, x.theta, x.thetadot, x.thetaddot, &p) + x.f_fric_true;
            assert!(r.abs() < 1e-6);
            // Corrected rotational equation with the recorded torque.
            let rot = p.pivot_inertia() * x.thetaddot + p.m_l * p.d * x.theta.cos() * x.xddot_b + p.m_l * p.d * p.g * x.theta.sin()
                - x.tau;
            assert!(rot.abs() < 1e-6);
            assert!(x.f_n_est >= 0.0);
        }
    }

    #[test]
    fn zero_amplitude_is_flat() {
        let s = generate_swing_trial(0.0, 1.0, 1.0, 0, &settings()).unwrap();
        assert!(s.iter().all(|x| x.f_fric_true == 0.0 && x.theta == 0.0 && x.x_b == 0.0));
    }

    #[test]
    fn rejects_bad_amplitude() {
        assert!(generate_swing_trial(95.0, 1.0, 1.0, 0, &settings()).is_err());
    }

    #[test]
    fn waypoint_reference_is_continuous() {
        let r = Reference::translation(4.5);
        let mut prev = r.eval(0.0).0;
        for i in 1..4500 {
            let t = i as f64 * 1e-3;
            let (th, _) = r.eval(t);
            assert!((th - prev).abs() < 0.02);
            prev = th;
        }
    }

    #[test]
    fn noise_zero_fraction_is_identity() {
        let s = generate_swing_trial(50.0, 1.0, 0.5, 0, &settings()).unwrap();
        let ds = Dataset::new(s, 400.0);
        let noisy = add_noise(&ds, 0.0, 3, &PoBParams::default());
        assert_eq!(noisy.samples, ds.samples);
    }

    #[test]
    fn noise_leaves_constant_channels_and_truth() {
        let s = generate_swing_trial(50.0, 1.0, 0.5, 0, &settings()).unwrap();
        let mut ds = Dataset::new(s, 400.0);
        for x in &mut ds.samples {
            x.tau = 1.25;
        }
        let noisy = add_noise(&ds, 0.05, 3, &PoBParams::default());
        for (a, b) in ds.samples.iter().zip(&noisy.samples) {
            assert_eq!(a.tau, b.tau);
            assert_eq!(a.f_fric_true, b.f_fric_true);
            assert_eq!(a.z_true, b.z_true);
        }
    }

    #[test]
    fn csv_rejects_missing_column_and_bad_value() {
        let text = "t,trial_id,x_b\n0,0,0\n";
        match read_csv_from(text.as_bytes()) {
            Err(Error::MissingColumn(c)) => assert_eq!(c, "xdot_b"),
            other => panic!("{other:?}"),
        }
        let mut good = Vec::new();
        let ds = Dataset::new(vec![Sample::default(); 2], 400.0);
        write_csv_to(&ds, &mut good).unwrap();
        let text = String::from_utf8(good).unwrap().replacen("0e0,0,", "abc,0,", 1);
        match read_csv_from(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
