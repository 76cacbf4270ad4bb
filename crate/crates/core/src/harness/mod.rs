//! Monte Carlo estimators of spectral statistics, reference bound curves,
//! and the verification suites behind the CLI.

mod config;
mod suites;

use serde::Serialize;

use crate::error::{LoclabError, Result};
use crate::localization::simulate_paths;
use crate::measures::MeasureModel;
use crate::numerics::ExtReal;
use crate::potentials::{gronwall_log_factor, Potential};

pub use config::{parse_number, Config, Constants};
pub use suites::{
    render_report, run_matrix, verify_suite, write_outputs, CheckEntry, Lab, ModelRun, Summary, SuiteReport,
    SUITES,
};

/// CI width in standard errors.
pub const CI_SIGMAS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl McEstimate {
    /// Mean and `sd/√n`. Constant samples give their common value and 0.
    pub fn from_samples(xs: &[f64], seed: u64) -> McEstimate {
        let n_paths = xs.len();
        if let Some(&first) = xs.first() {
            if xs.iter().all(|&x| x == first) {
                return McEstimate { mean: first, stderr: 0.0, n_paths, seed };
            }
        }
        let (mean, stderr) = crate::localization::mean_stderr(xs);
        McEstimate { mean, stderr, n_paths, seed }
    }

    pub fn upper(&self) -> f64 {
        self.mean + CI_SIGMAS * self.stderr
    }

    pub fn lower(&self) -> f64 {
        self.mean - CI_SIGMAS * self.stderr
    }
}

/// Spectra of `n_paths` paths recorded on a schedule: `spectra[path][time]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectraRun {
    pub model_spec: String,
    pub dim: usize,
    pub schedule: Vec<f64>,
    pub h: f64,
    pub seed: u64,
    pub spectra: Vec<Vec<Vec<f64>>>,
}

impl SpectraRun {
    pub fn simulate(model: &MeasureModel, schedule: &[f64], h: f64, seed: u64, n_paths: usize) -> Result<SpectraRun> {
        let paths = simulate_paths(model, schedule, h, seed, n_paths)?;
        Ok(SpectraRun {
            model_spec: model.to_string(),
            dim: model.dim(),
            schedule: schedule.to_vec(),
            h,
            seed,
            spectra: paths
                .into_iter()
                .map(|tr| tr.spectra.into_iter().map(|s| s.eigenvalues).collect())
                .collect(),
        })
    }

    pub fn n_paths(&self) -> usize {
        self.spectra.len()
    }

    pub fn time_index(&self, t: f64) -> Result<usize> {
        self.schedule
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * t.max(1.0))
            .ok_or_else(|| LoclabError::InvalidArgument(format!("time {t} is not on the recorded schedule")))
    }

    /// Per-path statistic `stat(spectrum)` at time `t`.
    pub fn samples<F: Fn(&[f64]) -> f64>(&self, t: f64, stat: F) -> Result<Vec<f64>> {
        let k = self.time_index(t)?;
        Ok(self.spectra.iter().map(|p| stat(&p[k])).collect())
    }

    pub fn estimate<F: Fn(&[f64]) -> f64>(&self, t: f64, stat: F) -> Result<McEstimate> {
        Ok(McEstimate::from_samples(&self.samples(t, stat)?, self.seed))
    }

    /// `Σ_i 1{λ_i > threshold}`, counted with multiplicity.
    pub fn tail(&self, t: f64, threshold: f64) -> Result<McEstimate> {
        self.estimate(t, |l| tail_count(l, threshold))
    }

    /// `Tr(A_t^p)`.
    pub fn trace_moment(&self, t: f64, p: f64) -> Result<McEstimate> {
        self.estimate(t, |l| trace_power(l, p))
    }

    /// `E F_t` with `F_t = Σ f(λ_i)` on each recorded time in `times`, and
    /// the one-sided Grönwall envelope check between consecutive times.
    pub fn ef_curve(&self, pot: &Potential, times: &[f64]) -> Result<EfCurve> {
        if times.is_empty() || !(times[0] > 0.0) || times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(LoclabError::InvalidArgument("EF times must be increasing and start above 0".into()));
        }
        let log_floor = (self.dim as f64).ln() + pot.log_f(0.0);
        let mut points = Vec::with_capacity(times.len());
        for &t in times {
            let logs = self.samples(t, |l| crate::potentials::eval_log_f(pot, l))?;
            points.push(EfPoint::from_logs(t, &logs, self.seed));
        }
        let checks = points
            .windows(2)
            .map(|w| {
                let (a, b) = (&w[0], &w[1]);
                let log_factor = gronwall_log_factor(pot.d0, a.t.ln(), b.t.ln())?;
                let log_lower_a = a.log_lower().max(log_floor);
                let log_upper_b = b.log_upper();
                let slack = log_factor + log_lower_a - log_upper_b;
                Ok(EnvelopeCheck { t_a: a.t, t_b: b.t, log_factor, log_lower_a, log_upper_b, slack, pass: slack >= 0.0 })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EfCurve {
            model_spec: self.model_spec.clone(),
            d0: pot.d0,
            r0: pot.r0,
            pass: checks.iter().all(|c| c.pass),
            points,
            checks,
        })
    }
}

pub fn tail_count(eigenvalues: &[f64], threshold: f64) -> f64 {
    eigenvalues.iter().filter(|&&l| l > threshold).count() as f64
}

pub fn trace_power(eigenvalues: &[f64], p: f64) -> f64 {
    eigenvalues.iter().map(|l| l.powf(p)).sum()
}

/// `E F_t` on a shifted scale: `mean = e^{shift} * scaled.mean`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EfPoint {
    pub t: f64,
    pub shift: f64,
    pub scaled: McEstimate,
    pub log_mean: f64,
}

impl EfPoint {
    fn from_logs(t: f64, logs: &[f64], seed: u64) -> EfPoint {
        let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scaled: Vec<f64> = logs.iter().map(|l| (l - shift).exp()).collect();
        let scaled = McEstimate::from_samples(&scaled, seed);
        EfPoint { t, shift, log_mean: shift + scaled.mean.ln(), scaled }
    }

    pub fn log_upper(&self) -> f64 {
        self.shift + self.scaled.upper().ln()
    }

    /// `-inf` when the lower CI endpoint is not positive.
    pub fn log_lower(&self) -> f64 {
        let l = self.scaled.lower();
        if l > 0.0 {
            self.shift + l.ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeCheck {
    pub t_a: f64,
    pub t_b: f64,
    pub log_factor: f64,
    /// Log of the lower CI at `t_a`, floored at `ln(n f(0))` since `F ≥ n f(0)`.
    pub log_lower_a: f64,
    pub log_upper_b: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EfCurve {
    pub model_spec: String,
    pub d0: f64,
    pub r0: f64,
    pub points: Vec<EfPoint>,
    pub checks: Vec<EnvelopeCheck>,
    pub pass: bool,
}

/// Monte Carlo estimate of `Σ_i P(λ_{i;t} > threshold)`.
pub fn estimate_tail(
    model: &MeasureModel,
    t: f64,
    threshold: f64,
    n_paths: usize,
    h: f64,
    seed: u64,
) -> Result<McEstimate> {
    if !(threshold > 0.0 && t > 0.0) {
        return Err(LoclabError::InvalidArgument("tail needs t > 0 and threshold > 0".into()));
    }
    SpectraRun::simulate(model, &[t], h, seed, n_paths)?.tail(t, threshold)
}

/// Monte Carlo estimate of `E Tr(A_t^p)`.
pub fn estimate_trace_moment(
    model: &MeasureModel,
    t: f64,
    p: f64,
    n_paths: usize,
    h: f64,
    seed: u64,
) -> Result<McEstimate> {
    if !(p >= 1.0 && t >= 0.0) {
        return Err(LoclabError::InvalidArgument("trace moment needs p >= 1 and t >= 0".into()));
    }
    SpectraRun::simulate(model, &[t], h, seed, n_paths)?.trace_moment(t, p)
}

/// `E F_t` along `times` with the Grönwall envelope check.
pub fn estimate_ef(
    model: &MeasureModel,
    pot: &Potential,
    times: &[f64],
    n_paths: usize,
    h: f64,
    seed: u64,
) -> Result<EfCurve> {
    SpectraRun::simulate(model, times, h, seed, n_paths)?.ef_curve(pot, times)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundValue {
    pub name: &'static str,
    pub t: f64,
    pub ln_n: f64,
    pub p: f64,
    pub value: ExtReal,
    pub log10: f64,
    /// False when `t` lies outside the window in which the curve is stated.
    pub in_domain: bool,
}

/// A reference curve and the constants it was evaluated with.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCurve {
    pub name: &'static str,
    pub params: Vec<(&'static str, f64)>,
}

impl BoundCurve {
    /// `None` when a needed constant is missing.
    pub fn evaluate(&self, t: f64, ln_n: f64, p: f64) -> Option<BoundValue> {
        let get = |k: &str| self.params.iter().find(|(n, _)| *n == k).map(|&(_, v)| v);
        let (log, in_domain) = match self.name {
            "small_time_tail" => {
                let cc = get("C")?;
                let top = -(2f64.ln() + cc.ln() + 0.5 * ln_n);
                (4f64.ln() - 1.0 / (cc * t), t > 0.0 && t.ln() <= top)
            }
            "operator_norm" => {
                let c1 = get("C1")?;
                (-1.0 / (c1 * t), t >= 0.0 && t <= 1.0 / (c1 * ln_n * ln_n))
            }
            "tail_inverse_t" => (2f64.ln() - get("c")? / t + ln_n, t > 0.0),
            "tail_inverse_sqrt_t" => (2f64.ln() - get("c")? / t.sqrt() + ln_n, t > 0.0),
            "moment_growth" => (get("beta")? * p * (get("C")? * p).ln() + ln_n, true),
            "moment_envelope" => (2.0 * p * (6.0 * p).ln() + ln_n, true),
            "moment_split" => {
                let a = p * (3.0 * p).ln();
                let b = -get("c")? / t.sqrt() - p * t.ln();
                let (hi, lo) = if a > b { (a, b) } else { (b, a) };
                (hi + (lo - hi).exp().ln_1p() + ln_n, t > 0.0)
            }
            _ => return None,
        };
        let value = ExtReal::from_ln(log);
        Some(BoundValue { name: self.name, t, ln_n, p, log10: value.log10_abs_f64(), value, in_domain })
    }
}

/// All curves whose constants are available.
pub fn bound_curves(constants: &Constants) -> Vec<BoundCurve> {
    let mut out = Vec::new();
    let mut push = |name: &'static str, params: Vec<(&'static str, Option<f64>)>| {
        if params.iter().all(|(_, v)| v.is_some()) {
            out.push(BoundCurve { name, params: params.into_iter().map(|(k, v)| (k, v.unwrap())).collect() });
        }
    };
    push("small_time_tail", vec![("C", constants.big_c)]);
    push("operator_norm", vec![("C1", constants.c1)]);
    push("tail_inverse_t", vec![("c", constants.c)]);
    push("tail_inverse_sqrt_t", vec![("c", constants.c)]);
    push("moment_growth", vec![("C", constants.big_c), ("beta", constants.beta)]);
    push("moment_envelope", vec![]);
    push("moment_split", vec![("c", constants.c)]);
    out
}

/// Every available reference curve at `(t, n, p)`.
pub fn reference_bounds(t: f64, ln_n: f64, p: f64, constants: &Constants) -> Vec<BoundValue> {
    bound_curves(constants).iter().filter_map(|c| c.evaluate(t, ln_n, p)).collect()
}

/// `(1 - e^{-1/2}) e^{-r/c} r^r n`, evaluated in log space.
pub fn sharpness_lower_bound(r: f64, c: f64, ln_n: f64) -> Result<ExtReal> {
    if !(r > 0.0 && c > 0.0) {
        return Err(LoclabError::InvalidArgument(format!("need r > 0 and c > 0, got r = {r}, c = {c}")));
    }
    let log = (-(-0.5f64).exp_m1()).ln() - r / c + r * r.ln() + ln_n;
    Ok(ExtReal::from_ln(log))
}

/// Largest `c` for which `2 e^{-c t^{-1/2}} n` stays above every empirical
/// upper CI of the tail; `+inf` when all upper CIs vanish.
pub fn empirical_c_max(points: &[(f64, f64, f64)]) -> f64 {
    points
        .iter()
        .filter(|&&(_, upper, _)| upper > 0.0)
        .map(|&(t, upper, n)| t.sqrt() * (2.0 * n / upper).ln())
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::parse_model;
    use crate::numerics::{jacobi_spectrum, SymMatrix};
    use crate::potentials::build_potential;

    #[test]
    fn constant_samples_have_zero_stderr() {
        let e = McEstimate::from_samples(&[0.1; 7], 3);
        assert_eq!((e.mean, e.stderr), (0.1, 0.0));
        let e = McEstimate::from_samples(&[1.0, 3.0], 3);
        assert_eq!(e.mean, 2.0);
        assert!((e.stderr - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_estimators_are_exact() {
        let m = parse_model("gaussian(4)", None).unwrap();
        for t in [0.1, 0.5, 1.0] {
            assert_eq!(estimate_tail(&m, t, 8.0 / 3.0, 5, 1e-3, 1).unwrap().mean, 0.0);
            for p in [1.0, 2.0, 3.5] {
                let e = estimate_trace_moment(&m, t, p, 5, 1e-3, 1).unwrap();
                assert_eq!(e.stderr, 0.0);
                assert!((e.mean - 4.0 * (1.0 + t).powf(-p)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trace_at_time_zero_is_the_dimension() {
        let m = parse_model("product(uniform*3,dexp*2)", None).unwrap();
        let e = estimate_trace_moment(&m, 0.0, 1.0, 4, 1e-3, 1).unwrap();
        assert!((e.mean - 5.0).abs() < 1e-10);
    }

    #[test]
    fn gaussian_ef_is_deterministic_and_passes() {
        let m = parse_model("gaussian(3)", None).unwrap();
        let pot = build_potential(5.0, 8.0 / 3.0, 1000).unwrap();
        let c = estimate_ef(&m, &pot, &[0.1, 0.2, 0.4], 4, 1e-3, 2).unwrap();
        assert!(c.pass);
        for pt in &c.points {
            let exact = 3.0 * pot.f(1.0 / (1.0 + pt.t));
            assert!((pt.log_mean - exact.ln()).abs() < 1e-12);
            assert_eq!(pt.scaled.stderr, 0.0);
        }
        assert!(c.points.windows(2).all(|w| w[1].log_mean < w[0].log_mean));
    }

    #[test]
    fn diagonal_spectrum_matches_dense_eigensolve() {
        let m = parse_model("product(dexp*3,uniform*2)", None).unwrap();
        let run = SpectraRun::simulate(&m, &[0.2], 1e-3, 9, 3).unwrap();
        let traj = simulate_paths(&m, &[0.2], 1e-3, 9, 3).unwrap();
        for (p, tr) in traj.iter().enumerate() {
            let mom = crate::measures::tilted_moments(&m, &tr.states[0].theta, 0.2).unwrap();
            // rotate the diagonal covariance by a fixed orthogonal matrix
            let n = 5;
            let q: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 - 2.0 / n as f64 } else { -2.0 / n as f64 }).collect())
                .collect();
            let mut dense = SymMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    let v: f64 = (0..n).map(|k| q[i][k] * mom.cov.get(k, k) * q[j][k]).sum();
                    dense.set(i, j, v);
                }
            }
            let s = jacobi_spectrum(&dense, 1e-15).unwrap();
            for (a, b) in s.eigenvalues.iter().zip(&run.spectra[p][0]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bound_curve_examples() {
        let k = Constants { c: Some(0.5), big_c: Some(6.0), c1: Some(2.0), beta: Some(2.0), kls_k: None };
        let ln_n = 100f64.ln();
        let t_end = 1.0 / (2.0 * ln_n * ln_n);
        let oper = BoundCurve { name: "operator_norm", params: vec![("C1", 2.0)] }.evaluate(t_end, ln_n, 1.0).unwrap();
        assert!((oper.value.ln_abs_f64() + ln_n * ln_n).abs() < 1e-12);
        assert!(oper.in_domain);
        let sqrt_tail = BoundCurve { name: "tail_inverse_sqrt_t", params: vec![("c", 0.5)] }.evaluate(1e30, ln_n, 1.0).unwrap();
        assert!((sqrt_tail.value.to_f64() - 200.0).abs() < 1e-9);
        let growth = BoundCurve { name: "moment_growth", params: vec![("C", 6.0), ("beta", 2.0)] }.evaluate(0.1, ln_n, 1.0).unwrap();
        assert!((growth.value.to_f64() - 3600.0).abs() < 1e-9);
        assert_eq!(reference_bounds(0.1, ln_n, 2.0, &k).len(), 7);
        assert_eq!(reference_bounds(0.1, ln_n, 2.0, &Constants::default()).len(), 1);
    }

    #[test]
    fn sharpness_spot_values() {
        let v = sharpness_lower_bound(1.0, 1.0, 0.0).unwrap().to_f64();
        assert!((v - (1.0 - (-0.5f64).exp()) * (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.144749).abs() < 1e-6);
        let twice = sharpness_lower_bound(2.5, 0.7, 2f64.ln()).unwrap().to_f64();
        let once = sharpness_lower_bound(2.5, 0.7, 0.0).unwrap().to_f64();
        assert!((twice - 2.0 * once).abs() < 1e-14 * twice);
        assert!(sharpness_lower_bound(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn c_max_examples() {
        assert_eq!(empirical_c_max(&[(0.1, 0.0, 8.0)]), f64::INFINITY);
        let c = empirical_c_max(&[(0.25, 1.0, 8.0), (0.04, 2.0, 8.0)]);
        assert!((c - (0.2 * 8f64.ln()).min(0.5 * 16f64.ln())).abs() < 1e-15);
    }
}
