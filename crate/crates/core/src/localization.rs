//! Euler–Maruyama driver for the localization process in tilt form.
//!
//! The state is `(θ, t)` with `p_t ∝ ρ(x) exp(⟨θ, x⟩ - t|x|²/2)`, advanced by
//! `θ' = θ + a(θ, t) h + √h ξ`, `t' = t + h`. Path `i` draws its increments
//! from stream `i` of the master seed, so results do not depend on how paths
//! are scheduled across threads.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LoclabError, Result};
use crate::measures::{lichnerowicz_guard, MeasureModel, TiltMoments1D};
use crate::numerics::rng::fill_standard_normal;
use crate::numerics::{RngStream, Spectrum};

/// Default step size.
pub const DEFAULT_H: f64 = 1e-3;
/// Simulations stop at this time.
pub const HORIZON_CAP: f64 = 4.0;
/// Coefficient `C` of the `C·h` Euler bias allowance in martingale checks.
pub const EULER_BIAS_CONSTANT: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltState {
    pub theta: Vec<f64>,
    pub t: f64,
}

impl TiltState {
    pub fn initial(dim: usize) -> Self {
        TiltState { theta: vec![0.0; dim], t: 0.0 }
    }
}

/// One Euler–Maruyama step with the barycenter as drift.
pub fn em_step(state: &TiltState, model: &MeasureModel, h: f64, xi: &[f64]) -> Result<TiltState> {
    let mut next = state.clone();
    let mut drift = vec![0.0; model.dim()];
    advance(&mut next.theta, state.t, model, h, xi, &mut drift)?;
    next.t = state.t + h;
    Ok(next)
}

fn advance(theta: &mut [f64], t: f64, model: &MeasureModel, h: f64, xi: &[f64], drift: &mut [f64]) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(LoclabError::InvalidArgument(format!("step must be positive, got {h}")));
    }
    if xi.len() != theta.len() {
        return Err(LoclabError::InvalidArgument("noise and state dimensions differ".into()));
    }
    if t == 0.0 && theta.iter().all(|&x| x == 0.0) {
        // isotropic start: the barycenter is exactly zero
        drift.iter_mut().for_each(|d| *d = 0.0);
    } else {
        model.barycenter(theta, t, drift)?;
    }
    let sh = h.sqrt();
    for ((th, &a), &z) in theta.iter_mut().zip(drift.iter()).zip(xi) {
        *th += a * h + sh * z;
    }
    Ok(())
}

/// Step indices of the record times; fails unless every time is a multiple of `h`.
pub fn aligned_steps(schedule: &[f64], h: f64) -> Result<Vec<u64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(LoclabError::InvalidArgument(format!("step must be positive, got {h}")));
    }
    if schedule.is_empty() {
        return Err(LoclabError::InvalidArgument("empty schedule".into()));
    }
    let mut steps = Vec::with_capacity(schedule.len());
    for (i, &s) in schedule.iter().enumerate() {
        if !(0.0..=HORIZON_CAP).contains(&s) {
            return Err(LoclabError::InvalidArgument(format!(
                "record time {s} outside [0, {HORIZON_CAP}]"
            )));
        }
        if i > 0 && s <= schedule[i - 1] {
            return Err(LoclabError::InvalidArgument("record times must be strictly increasing".into()));
        }
        let k = (s / h).round();
        if (k * h - s).abs() > 1e-9 * s.max(h) {
            return Err(LoclabError::MisalignedSchedule(s));
        }
        steps.push(k as u64);
    }
    Ok(steps)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub schedule: Vec<f64>,
    pub states: Vec<TiltState>,
    pub spectra: Vec<Spectrum>,
    pub stream: RngStream,
    pub h: f64,
}

/// Simulates one path from `θ = 0, t = 0`, recording state and covariance
/// spectrum at each scheduled time.
pub fn simulate_trajectory(model: &MeasureModel, schedule: &[f64], h: f64, stream: RngStream) -> Result<Trajectory> {
    let steps = aligned_steps(schedule, h)?;
    let n = model.dim();
    let mut rng = stream.rng();
    let mut theta = vec![0.0; n];
    let mut xi = vec![0.0; n];
    let mut drift = vec![0.0; n];
    let mut per = vec![TiltMoments1D { mean: 0.0, var: 0.0, log_z: 0.0 }; n];
    let mut states = Vec::with_capacity(steps.len());
    let mut spectra = Vec::with_capacity(steps.len());
    let mut k = 0u64;
    for &target in &steps {
        while k < target {
            fill_standard_normal(&mut rng, &mut xi);
            advance(&mut theta, k as f64 * h, model, h, &xi, &mut drift)?;
            k += 1;
        }
        let t = k as f64 * h;
        model.coordinate_moments(&theta, t, &mut per)?;
        let vars: Vec<f64> = per.iter().map(|m| m.var).collect();
        let spectrum = Spectrum::from_diagonal(&vars);
        lichnerowicz_guard(t, spectrum.max())?;
        states.push(TiltState { theta: theta.clone(), t });
        spectra.push(spectrum);
    }
    Ok(Trajectory {
        schedule: schedule.to_vec(),
        states,
        spectra,
        stream,
        h,
    })
}

/// Runs `job(i)` for `i in 0..n_paths` in parallel; results come back in path order.
pub fn run_paths<T, F>(n_paths: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..n_paths).into_par_iter().map(job).collect()
}

/// Simulates `n_paths` independent paths; path `i` uses stream `i`.
pub fn simulate_paths(
    model: &MeasureModel,
    schedule: &[f64],
    h: f64,
    master_seed: u64,
    n_paths: usize,
) -> Result<Vec<Trajectory>> {
    aligned_steps(schedule, h)?;
    run_paths(n_paths, |i| simulate_trajectory(model, schedule, h, RngStream::new(master_seed, i as u64)))
}

/// Writes `path,t,lambda_1,...,lambda_n`, one row per path and record time.
pub fn write_spectra_csv<W: Write>(out: &mut W, trajectories: &[Trajectory]) -> Result<()> {
    let n = trajectories.first().and_then(|t| t.spectra.first()).map_or(0, |s| s.eigenvalues.len());
    write!(out, "path,t")?;
    for i in 1..=n {
        write!(out, ",lambda_{i}")?;
    }
    writeln!(out)?;
    for (p, tr) in trajectories.iter().enumerate() {
        for (t, s) in tr.schedule.iter().zip(&tr.spectra) {
            write!(out, "{p},{t}")?;
            for l in &s.eigenvalues {
                write!(out, ",{l}")?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Everything needed to regenerate a batch of paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Replay {
    pub master_seed: u64,
    pub h: f64,
    pub schedule: Vec<f64>,
    pub model_spec: String,
}

/// Sample mean and standard error (`sd / √n`, `n - 1` in the variance).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointCheck {
    pub x: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
    pub target: f64,
    pub allowance: f64,
    pub pass: bool,
}

impl PointCheck {
    fn new(x: Vec<f64>, samples: &[f64], target: f64, h: f64) -> Self {
        let (mean, stderr) = mean_stderr(samples);
        let allowance = EULER_BIAS_CONSTANT * h;
        let pass = (mean - target).abs() <= 3.0 * stderr + allowance;
        PointCheck { x, mean, stderr, target, allowance, pass }
    }

    pub fn bias(&self) -> f64 {
        self.mean - self.target
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MartingaleReport {
    pub horizon: f64,
    pub h: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub checks: Vec<PointCheck>,
    pub pass: bool,
}

fn final_states(model: &MeasureModel, n_paths: usize, horizon: f64, h: f64, seed: u64) -> Result<Vec<TiltState>> {
    if n_paths < 100 {
        return Err(LoclabError::InvalidArgument(format!("need at least 100 paths, got {n_paths}")));
    }
    if horizon == 0.0 {
        return Ok(vec![TiltState::initial(model.dim()); n_paths]);
    }
    let paths = simulate_paths(model, &[horizon], h, seed, n_paths)?;
    Ok(paths.into_iter().map(|mut t| t.states.pop().expect("one record")).collect())
}

/// `p_T(x) / p_0(x) = exp(⟨θ, x⟩ - T|x|²/2 - log Z(θ, T))` averaged over
/// paths; a martingale in `T`, so the mean should be 1.
pub fn martingale_check(
    model: &MeasureModel,
    x_points: &[Vec<f64>],
    n_paths: usize,
    horizon: f64,
    h: f64,
    seed: u64,
) -> Result<MartingaleReport> {
    let n = model.dim();
    if x_points.iter().any(|x| x.len() != n) {
        return Err(LoclabError::InvalidArgument("x point dimension differs from model".into()));
    }
    let finals = final_states(model, n_paths, horizon, h, seed)?;
    let log_z: Vec<f64> = run_paths(finals.len(), |i| {
        let mut per = vec![TiltMoments1D { mean: 0.0, var: 0.0, log_z: 0.0 }; n];
        model.coordinate_moments(&finals[i].theta, finals[i].t, &mut per)?;
        Ok(per.iter().map(|m| m.log_z).sum())
    })?;
    let log_z0: f64 = {
        let mut per = vec![TiltMoments1D { mean: 0.0, var: 0.0, log_z: 0.0 }; n];
        model.coordinate_moments(&vec![0.0; n], 0.0, &mut per)?;
        per.iter().map(|m| m.log_z).sum()
    };
    let checks: Vec<PointCheck> = x_points
        .iter()
        .map(|x| {
            let x2: f64 = x.iter().map(|v| v * v).sum();
            let ratios: Vec<f64> = finals
                .iter()
                .zip(&log_z)
                .map(|(s, &lz)| {
                    if s.t == 0.0 {
                        return 1.0;
                    }
                    let dot: f64 = s.theta.iter().zip(x).map(|(a, b)| a * b).sum();
                    (dot - 0.5 * s.t * x2 - (lz - log_z0)).exp()
                })
                .collect();
            PointCheck::new(x.clone(), &ratios, 1.0, h)
        })
        .collect();
    Ok(MartingaleReport {
        horizon,
        h,
        n_paths,
        seed,
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

/// Per-coordinate mean of the barycenter `a_T`, which should vanish.
pub fn barycenter_martingale_check(
    model: &MeasureModel,
    n_paths: usize,
    horizon: f64,
    h: f64,
    seed: u64,
) -> Result<MartingaleReport> {
    let n = model.dim();
    let finals = final_states(model, n_paths, horizon, h, seed)?;
    let bary: Vec<Vec<f64>> = run_paths(finals.len(), |i| {
        let mut a = vec![0.0; n];
        if finals[i].t > 0.0 {
            model.barycenter(&finals[i].theta, finals[i].t, &mut a)?;
        }
        Ok(a)
    })?;
    let checks: Vec<PointCheck> = (0..n)
        .map(|j| {
            let samples: Vec<f64> = bary.iter().map(|a| a[j]).collect();
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            PointCheck::new(e, &samples, 0.0, h)
        })
        .collect();
    Ok(MartingaleReport {
        horizon,
        h,
        n_paths,
        seed,
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalvingReport {
    pub coarse: MartingaleReport,
    pub fine: MartingaleReport,
    pub pass: bool,
}

/// Reruns the martingale check at `h/2` and requires the bias not to grow
/// beyond the combined Monte Carlo noise.
pub fn bias_halving_check(
    model: &MeasureModel,
    x_points: &[Vec<f64>],
    n_paths: usize,
    horizon: f64,
    h: f64,
    seed: u64,
) -> Result<HalvingReport> {
    let coarse = martingale_check(model, x_points, n_paths, horizon, h, seed)?;
    let fine = martingale_check(model, x_points, n_paths, horizon, 0.5 * h, seed)?;
    let pass = coarse.checks.iter().zip(&fine.checks).all(|(c, f)| {
        let noise = 3.0 * (c.stderr * c.stderr + f.stderr * f.stderr).sqrt();
        f.bias().abs() <= c.bias().abs() + noise
    });
    Ok(HalvingReport { coarse, fine, pass })
}
