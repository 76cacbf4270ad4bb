//! Test potentials `f` and the quantities built from them.
//!
//! `f(r) = e^{D0 (r - r0)}` for `r ≤ r0 - 1/D0`, `f(r) = b r²` for `r ≥ r0`,
//! joined by a C² bridge. All checks run in the scaled bridge variable
//! `u = D0 (r - r0) + 1 ∈ [0, 1]`, in which `d²/du² = D0⁻² d²/dr²`. The
//! bound `|f''| ≤ D0² f` becomes `|f_uu| ≤ f`, so certificates do not depend
//! on the magnitude of `D0` and survive `D0` far beyond `f64` squaring range.
//!
//! Two bridge shapes are tried in order:
//!
//! * a quintic Hermite polynomial in `u`, with `b` scanned over `[1/20, 1/5]`;
//! * `f = exp(h)`, `h(u) = -1 + ∫₀ᵘ tan θ`, where `θ` decreases from `π/4` to
//!   `atan(2/(D0 r0))` along a degree-7 polynomial whose end slopes reproduce
//!   the second derivatives of both outer pieces. Here
//!   `f_uu / f = θ'(1 + tan²θ) + tan²θ`, which stays in `[-1, 1]`.

use std::f64::consts::FRAC_PI_4;

use serde::Serialize;

use crate::error::{LoclabError, Result};
use crate::numerics::{ExtReal, GaussLegendre};

pub const B_MIN: f64 = 1.0 / 20.0;
pub const B_MAX: f64 = 1.0 / 5.0;
pub const R0_MIN: f64 = 7.0 / 3.0;
pub const R0_MAX: f64 = 8.0 / 3.0;
/// Points of the dense bridge grid.
pub const BRIDGE_POINTS: usize = 1000;
/// Candidate values of `b` for the quintic bridge.
pub const QUINTIC_SCAN: usize = 301;
/// Smallest relative slack accepted for a quintic candidate.
pub const QUINTIC_MIN_SLACK: f64 = 1e-6;
/// Step of the one-sided finite differences across the junctions, in `u`.
pub const FD_STEP_U: f64 = 1e-3;
/// Largest accepted C² junction mismatch, relative to `D0² f`.
pub const JUNCTION_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Bridge {
    /// `f(u) = Σ c_k u^k`.
    Quintic { coefficients: [f64; 6] },
    /// `θ(u) = π/4 - (A Ψ(u) + ρ u²/2)`, `Ψ(u) = u - ((2u - 1)⁷ + 1)/14`.
    Riccati { a: f64, rho: f64, end_log_value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JunctionResiduals {
    /// Largest analytic mismatch of `(f, f', f'')` scaled by `(f, D0 f, D0² f)`.
    pub analytic: f64,
    /// One-sided finite-difference second derivatives, relative to `D0² f`.
    pub finite_difference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub grid_points: usize,
    pub bridge_points: usize,
    /// `min (1 - |f''| / (D0² f))`; non-negative iff `|f''| ≤ D0² f` everywhere.
    pub min_curvature_slack: f64,
    /// `min f' / (D0 f)` over the grid.
    pub min_log_slope: f64,
    pub left_junction: JunctionResiduals,
    pub right_junction: JunctionResiduals,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Potential {
    pub d0: f64,
    pub r0: f64,
    pub b: f64,
    pub bridge: Bridge,
    pub certificate: Certificate,
}

/// Value, first and second `u`-derivative divided by the value.
#[derive(Clone, Copy, Debug)]
struct Jet {
    log_f: f64,
    d1: f64,
    d2: f64,
}

impl Bridge {
    fn jet(&self, u: f64) -> Jet {
        match self {
            Bridge::Quintic { coefficients: c } => {
                let p = poly(c, u);
                let p1 = poly(&[c[1], 2.0 * c[2], 3.0 * c[3], 4.0 * c[4], 5.0 * c[5], 0.0], u);
                let p2 = poly(&[2.0 * c[2], 6.0 * c[3], 12.0 * c[4], 20.0 * c[5], 0.0, 0.0], u);
                Jet { log_f: p.ln(), d1: p1 / p, d2: p2 / p }
            }
            &Bridge::Riccati { a, rho, .. } => {
                let q = riccati_theta(a, rho, u).tan();
                let dtheta = -(a * (1.0 - (2.0 * u - 1.0).powi(6)) + rho * u);
                Jet {
                    log_f: -1.0 + riccati_integral(a, rho, u),
                    d1: q,
                    d2: dtheta * (1.0 + q * q) + q * q,
                }
            }
        }
    }
}

fn poly(c: &[f64; 6], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * u + k)
}

fn riccati_theta(a: f64, rho: f64, u: f64) -> f64 {
    let psi = u - ((2.0 * u - 1.0).powi(7) + 1.0) / 14.0;
    FRAC_PI_4 - (a * psi + 0.5 * rho * u * u)
}

fn riccati_integral(a: f64, rho: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    GaussLegendre::twenty_four().integrate(|s| riccati_theta(a, rho, s).tan(), 0.0, u)
}

/// Quintic Hermite coefficients on `[0, 1]` from end values and derivatives.
fn quintic_hermite(p0: f64, d0: f64, s0: f64, p1: f64, d1: f64, s1: f64) -> [f64; 6] {
    // Power-basis coefficients of the six Hermite basis polynomials.
    const H: [[f64; 6]; 6] = [
        [1.0, 0.0, 0.0, -10.0, 15.0, -6.0],
        [0.0, 1.0, 0.0, -6.0, 8.0, -3.0],
        [0.0, 0.0, 0.5, -1.5, 1.5, -0.5],
        [0.0, 0.0, 0.0, 10.0, -15.0, 6.0],
        [0.0, 0.0, 0.0, -4.0, 7.0, -3.0],
        [0.0, 0.0, 0.0, 0.5, -1.0, 0.5],
    ];
    let w = [p0, d0, s0, p1, d1, s1];
    let mut c = [0.0; 6];
    for (basis, &wk) in H.iter().zip(&w) {
        for (ck, &hk) in c.iter_mut().zip(basis) {
            *ck += wk * hk;
        }
    }
    c
}

fn bridge_grid(points: usize) -> impl Iterator<Item = f64> {
    (0..=points).map(move |k| k as f64 / points as f64)
}

/// Minimum of `min(1 - |P''|/P, P'/P)` over the interior of the bridge grid,
/// or `-inf` if `P ≤ 0`. At `u = 0` the slack is zero by construction.
fn quintic_slack(c: &[f64; 6]) -> f64 {
    let b = Bridge::Quintic { coefficients: *c };
    let mut slack = f64::INFINITY;
    let n = 2 * BRIDGE_POINTS;
    for u in bridge_grid(n).skip(1).take(n - 1) {
        if poly(c, u) <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let j = b.jet(u);
        slack = slack.min(1.0 - j.d2.abs()).min(j.d1);
    }
    slack
}

fn quintic_for(d0: f64, r0: f64, b: f64) -> [f64; 6] {
    let w = 1.0 / d0;
    let e = (-1.0f64).exp();
    quintic_hermite(e, e, e, b * r0 * r0, 2.0 * b * r0 * w, 2.0 * b * w * w)
}

fn riccati_for(d0: f64, r0: f64) -> (Bridge, f64) {
    let w = 1.0 / d0;
    let eps = 2.0 * w / r0;
    let rho = (2.0 * w * w / (r0 * r0)) / (1.0 + eps * eps);
    let a = (FRAC_PI_4 - eps.atan() - 0.5 * rho) * 7.0 / 6.0;
    let end_log_value = -1.0 + riccati_integral(a, rho, 1.0);
    let b = end_log_value.exp() / (r0 * r0);
    (Bridge::Riccati { a, rho, end_log_value }, b)
}

impl Potential {
    /// `u = D0 (r - r0) + 1`, written to stay exact when `r` is near `r0`.
    fn to_u(&self, r: f64) -> f64 {
        (r - self.r0) * self.d0 + 1.0
    }

    /// `ln f(r)`, finite everywhere.
    pub fn log_f(&self, r: f64) -> f64 {
        self.jet_r(r).0
    }

    pub fn f(&self, r: f64) -> f64 {
        self.log_f(r).exp()
    }

    /// `(ln f, f'/f, f''/f)` in the variable `r`.
    pub fn derivatives(&self, r: f64) -> (f64, f64, f64) {
        let (l, d1, d2) = self.jet_r(r);
        (l, d1, d2)
    }

    fn jet_r(&self, r: f64) -> (f64, f64, f64) {
        if r >= self.r0 {
            return (self.b.ln() + 2.0 * r.ln(), 2.0 / r, 2.0 / (r * r));
        }
        let u = self.to_u(r);
        if u <= 0.0 {
            return (self.d0 * (r - self.r0), self.d0, self.d0 * self.d0);
        }
        let j = self.bridge.jet(u);
        (j.log_f, self.d0 * j.d1, self.d0 * self.d0 * j.d2)
    }

    /// `(f'/(D0 f), f''/(D0² f))` at bridge coordinate `u`, any real `u`.
    fn scaled_jet(&self, u: f64) -> (f64, f64) {
        if u <= 0.0 {
            (1.0, 1.0)
        } else if u >= 1.0 {
            let rw = self.r0 * self.d0 + (u - 1.0);
            (2.0 / rw, 2.0 / (rw * rw))
        } else {
            let j = self.bridge.jet(u);
            (j.d1, j.d2)
        }
    }

    /// `ln f` at bridge coordinate `u` for `u` near `[0, 1]`.
    fn log_f_u(&self, u: f64) -> f64 {
        if u <= 0.0 {
            u - 1.0
        } else if u >= 1.0 {
            let rw = self.r0 * self.d0 + (u - 1.0);
            // b r² with r = rw / D0, kept as b r0² (rw / (r0 D0))²
            self.b.ln() + 2.0 * self.r0.ln() + 2.0 * (rw / (self.r0 * self.d0)).ln()
        } else {
            self.bridge.jet(u).log_f
        }
    }

    fn certify(&mut self, grid_points: usize) {
        let mut slack = f64::INFINITY;
        let mut slope = f64::INFINITY;
        let mut visit = |d1: f64, d2: f64| {
            slack = slack.min(1.0 - d2.abs());
            slope = slope.min(d1);
        };
        let top = 10.0 * self.r0;
        for k in 0..grid_points {
            let r = top * k as f64 / (grid_points - 1) as f64;
            let (d1, d2) = self.scaled_jet(self.to_u(r));
            visit(d1, d2);
        }
        for u in bridge_grid(BRIDGE_POINTS) {
            let (d1, d2) = self.scaled_jet(u);
            visit(d1, d2);
        }
        let left = self.junction(0.0);
        let right = self.junction(1.0);
        let pass = slack >= 0.0
            && slope > 0.0
            && left.analytic <= JUNCTION_TOL
            && right.analytic <= JUNCTION_TOL
            && left.finite_difference <= JUNCTION_TOL
            && right.finite_difference <= JUNCTION_TOL;
        self.certificate = Certificate {
            grid_points,
            bridge_points: BRIDGE_POINTS,
            min_curvature_slack: slack,
            min_log_slope: slope,
            left_junction: left,
            right_junction: right,
            pass,
        };
    }

    fn junction(&self, u: f64) -> JunctionResiduals {
        // outer piece on the far side of the junction
        let (outer_log, outer_d1, outer_d2) = if u == 0.0 {
            (-1.0, 1.0, 1.0)
        } else {
            let rw = self.r0 * self.d0;
            (self.b.ln() + 2.0 * self.r0.ln(), 2.0 / rw, 2.0 / (rw * rw))
        };
        let j = self.bridge.jet(u);
        let analytic = ((j.log_f - outer_log).exp_m1().abs())
            .max((j.d1 - outer_d1).abs())
            .max((j.d2 - outer_d2).abs());

        // Fourth-order one-sided second differences, scaled by f(u).
        let h = FD_STEP_U;
        let base = self.log_f_u(u);
        let fval = |x: f64| (self.log_f_u(x) - base).exp();
        let bridge_side = |x: f64| (self.bridge.jet(x).log_f - base).exp();
        let dir = if u == 0.0 { 1.0 } else { -1.0 };
        const W: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
        let second = |g: &dyn Fn(f64) -> f64, s: f64| {
            W.iter().enumerate().map(|(k, w)| w * g(u + s * k as f64 * h)).sum::<f64>() / (12.0 * h * h)
        };
        let from_bridge = second(&bridge_side, dir);
        let from_outer = second(&fval, -dir);
        JunctionResiduals {
            analytic,
            finite_difference: (from_bridge - from_outer).abs(),
        }
    }
}

/// Builds and certifies the potential for `(D0, r0)`.
pub fn build_potential(d0: f64, r0: f64, grid_points: usize) -> Result<Potential> {
    if !(d0 > 4.0 && d0.is_finite()) {
        return Err(LoclabError::InvalidArgument(format!("D0 must be a finite number above 4, got {d0}")));
    }
    let ulps = 8.0 * f64::EPSILON;
    if !(r0 >= R0_MIN * (1.0 - ulps) && r0 <= R0_MAX * (1.0 + ulps)) {
        return Err(LoclabError::InvalidArgument(format!("r0 must lie in [7/3, 8/3], got {r0}")));
    }
    if grid_points < 1000 {
        return Err(LoclabError::InvalidArgument(format!("need at least 1000 grid points, got {grid_points}")));
    }
    let empty = Certificate {
        grid_points,
        bridge_points: BRIDGE_POINTS,
        min_curvature_slack: f64::NAN,
        min_log_slope: f64::NAN,
        left_junction: JunctionResiduals { analytic: f64::NAN, finite_difference: f64::NAN },
        right_junction: JunctionResiduals { analytic: f64::NAN, finite_difference: f64::NAN },
        pass: false,
    };

    let mut best: Option<(f64, f64)> = None;
    for k in 0..QUINTIC_SCAN {
        let b = B_MIN + (B_MAX - B_MIN) * k as f64 / (QUINTIC_SCAN - 1) as f64;
        let s = quintic_slack(&quintic_for(d0, r0, b));
        if s >= QUINTIC_MIN_SLACK && best.is_none_or(|(_, bs)| s > bs) {
            best = Some((b, s));
        }
    }
    let mut candidates = Vec::new();
    if let Some((b, _)) = best {
        candidates.push((b, Bridge::Quintic { coefficients: quintic_for(d0, r0, b) }));
    }
    let (riccati, b_riccati) = riccati_for(d0, r0);
    candidates.push((b_riccati, riccati));

    let mut reasons = Vec::new();
    for (b, bridge) in candidates {
        if !(B_MIN..=B_MAX).contains(&b) {
            reasons.push(format!("b = {b} outside [1/20, 1/5]"));
            continue;
        }
        let mut pot = Potential { d0, r0, b, bridge, certificate: empty.clone() };
        pot.certify(grid_points);
        if pot.certificate.pass {
            return Ok(pot);
        }
        reasons.push(format!("certificate failed: {:?}", pot.certificate));
    }
    Err(LoclabError::ConstructionInfeasible(format!(
        "D0 = {d0}, r0 = {r0}: {}",
        reasons.join("; ")
    )))
}

/// `F = Σ f(λ_i)`.
pub fn eval_f(pot: &Potential, eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().map(|&l| pot.f(l)).sum()
}

/// `ln Σ f(λ_i)` without underflow.
pub fn eval_log_f(pot: &Potential, eigenvalues: &[f64]) -> f64 {
    let logs: Vec<f64> = eigenvalues.iter().map(|&l| pot.log_f(l)).collect();
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
}

/// Log of the Grönwall growth factor between `t1` and `t2`:
/// `500 ln(t2/t1) + 288√3 D0² (√t2 - √t1)`.
pub fn gronwall_log_factor(d0: f64, ln_t1: f64, ln_t2: f64) -> Result<f64> {
    if ln_t1 == f64::NEG_INFINITY || ln_t1.is_nan() || ln_t2.is_nan() {
        return Err(LoclabError::InvalidArgument("t1 must be positive".into()));
    }
    if !(ln_t1 <= ln_t2 && ln_t2 <= 0.0) {
        return Err(LoclabError::InvalidArgument(format!(
            "need 0 < t1 <= t2 <= 1, got ln t1 = {ln_t1}, ln t2 = {ln_t2}"
        )));
    }
    let c = 288.0 * 3f64.sqrt();
    // √t2 - √t1 = √t2 (1 - e^{(ln t1 - ln t2)/2})
    let diff = -(0.5 * ln_t2).exp() * (0.5 * (ln_t1 - ln_t2)).exp_m1();
    Ok(500.0 * (ln_t2 - ln_t1) + c * d0 * d0 * diff)
}

/// The Grönwall factor `E F_{t2} / E F_{t1}` bound.
pub fn gronwall_envelope(d0: f64, t1: f64, t2: f64) -> Result<ExtReal> {
    if !(t1 > 0.0) {
        return Err(LoclabError::InvalidArgument(format!("t1 must be positive, got {t1}")));
    }
    Ok(ExtReal::from_ln(gronwall_log_factor(d0, t1.ln(), t2.ln())?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GronwallProofCheck {
    pub p: f64,
    pub log_factor: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Checks `log factor(p⁻⁸ → 10⁻⁸ p⁻², D0 = p) ≤ 4000 ln p + p/9`.
pub fn gronwall_proof_check(p: f64) -> Result<GronwallProofCheck> {
    let lp = p.ln();
    let log_factor = gronwall_log_factor(p, -8.0 * lp, -8.0 * 10f64.ln() - 2.0 * lp)?;
    let bound = 4000.0 * lp + p / 9.0;
    Ok(GronwallProofCheck { p, log_factor, bound, pass: log_factor <= bound })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HandoffReport {
    pub s_prev: f64,
    pub b_prev: f64,
    /// `min (bound - f) / bound` over the grid.
    pub worst_margin: f64,
    pub worst_lambda: f64,
    pub violation: Option<f64>,
    pub pass: bool,
}

/// Certifies `f_next(λ) ≤ 6 b_prev λ²` on `(s_prev, 8/3]` and
/// `f_next(λ) ≤ 4 b_prev λ²` on `(8/3, 20]`.
pub fn handoff_check(pot_next: &Potential, b_prev: f64, s_prev: f64, grid_points: usize) -> Result<HandoffReport> {
    if grid_points < 2 {
        return Err(LoclabError::InvalidArgument("need at least two grid points".into()));
    }
    if !(B_MIN..=B_MAX).contains(&b_prev) {
        return Err(LoclabError::InvalidArgument(format!("b_prev must lie in [1/20, 1/5], got {b_prev}")));
    }
    if !(R0_MIN * (1.0 - 1e-15)..=R0_MAX * (1.0 + 1e-15)).contains(&s_prev) {
        return Err(LoclabError::InvalidArgument(format!("s_prev must lie in [7/3, 8/3], got {s_prev}")));
    }
    let split = 8.0 / 3.0;
    let top = 20.0;
    let mut worst_margin = f64::INFINITY;
    let mut worst_lambda = f64::NAN;
    let mut violation = None;
    let mut visit = |l: f64| {
        let factor = if l <= split { 6.0 } else { 4.0 };
        let log_bound = (factor * b_prev).ln() + 2.0 * l.ln();
        let margin = -(pot_next.log_f(l) - log_bound).exp_m1();
        if margin < worst_margin {
            worst_margin = margin;
            worst_lambda = l;
        }
        if margin < 0.0 && violation.is_none() {
            violation = Some(l);
        }
    };
    // the open left end is approached but not included
    for k in 1..=grid_points {
        visit(s_prev + (top - s_prev) * k as f64 / grid_points as f64);
    }
    for l in [split, split * (1.0 + f64::EPSILON), pot_next.r0, pot_next.r0 - 1.0 / pot_next.d0] {
        if l > s_prev && l <= top {
            visit(l);
        }
    }
    Ok(HandoffReport {
        s_prev,
        b_prev,
        worst_margin,
        worst_lambda,
        violation,
        pass: violation.is_none(),
    })
}

/// JSON document written by `loclab potential`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialCertificateDoc {
    #[serde(rename = "D0")]
    pub d0: f64,
    pub r0: f64,
    pub b: f64,
    pub bridge: Bridge,
    pub min_curvature_slack: f64,
    pub junction_residuals: [JunctionResiduals; 2],
    pub certificate: Certificate,
}

impl From<&Potential> for PotentialCertificateDoc {
    fn from(p: &Potential) -> Self {
        PotentialCertificateDoc {
            d0: p.d0,
            r0: p.r0,
            b: p.b,
            bridge: p.bridge.clone(),
            min_curvature_slack: p.certificate.min_curvature_slack,
            junction_residuals: [p.certificate.left_junction.clone(), p.certificate.right_junction.clone()],
            certificate: p.certificate.clone(),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{adaptive_quad, Support};

    const D0S: [f64; 4] = [5.0, 10.0, 50.0, 1000.0];
    const R0S: [f64; 3] = [7.0 / 3.0, 2.5, 8.0 / 3.0];

    #[test]
    fn certified_over_the_parameter_grid() {
        for &d0 in &D0S {
            for &r0 in &R0S {
                let p = build_potential(d0, r0, 10_000).unwrap();
                assert!((B_MIN..=B_MAX).contains(&p.b));
                assert!(p.certificate.pass);
                assert!(p.certificate.min_curvature_slack >= 0.0);
            }
        }
    }

    #[test]
    fn outer_pieces_are_exact() {
        let p = build_potential(10.0, 2.5, 1000).unwrap();
        assert!((p.f(2.5 - 0.2) - (-2.0f64).exp()).abs() < 1e-15);
        assert!((p.f(3.0) - 9.0 * p.b).abs() < 1e-14);
        let (l, d1, d2) = p.derivatives(2.5 - 0.1);
        assert!((l + 1.0).abs() < 1e-15 && (d1 - 10.0).abs() < 1e-12 && (d2 - 100.0).abs() < 1e-10);
        assert!((0.45..=1.8).contains(&p.f(3.0)));
    }

    #[test]
    fn riccati_integral_matches_adaptive_quadrature() {
        let (bridge, _) = riccati_for(50.0, 2.5);
        let Bridge::Riccati { a, rho, end_log_value } = bridge else { unreachable!() };
        let q = adaptive_quad(|s| riccati_theta(a, rho, s).tan(), Support::Finite(0.0, 1.0), 1e-14).unwrap();
        assert!((end_log_value - (-1.0 + q)).abs() < 1e-14);
    }

    #[test]
    fn riccati_end_conditions() {
        for &d0 in &D0S {
            for &r0 in &R0S {
                let (bridge, _) = riccati_for(d0, r0);
                let j0 = bridge.jet(0.0);
                let j1 = bridge.jet(1.0);
                assert!((j0.d1 - 1.0).abs() < 1e-15 && (j0.d2 - 1.0).abs() < 1e-15);
                let rw = r0 * d0;
                assert!((j1.d1 - 2.0 / rw).abs() < 1e-14);
                assert!((j1.d2 - 2.0 / (rw * rw)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn quintic_hermite_interpolates() {
        let c = quintic_hermite(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let b = Bridge::Quintic { coefficients: c };
        let (j0, j1) = (b.jet(0.0), b.jet(1.0));
        assert!((j0.log_f - 0.0).abs() < 1e-15 && (j0.d1 - 2.0).abs() < 1e-14 && (j0.d2 - 3.0).abs() < 1e-14);
        assert!((j1.log_f - 4f64.ln()).abs() < 1e-14 && (j1.d1 * 4.0 - 5.0).abs() < 1e-12);
        assert!((j1.d2 * 4.0 - 6.0).abs() < 1e-12);
    }

    #[test]
    fn huge_d0_still_certifies() {
        let p = build_potential(125f64.exp(), 8.0 / 3.0, 1000).unwrap();
        assert!(p.certificate.pass);
        assert_eq!(p.f(2.0), 0.0);
        assert!((p.f(3.0) - 9.0 * p.b).abs() < 1e-14);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(build_potential(4.0, 2.5, 1000).is_err());
        assert!(build_potential(5.0, 2.0, 1000).is_err());
        assert!(build_potential(5.0, 2.5, 10).is_err());
    }

    #[test]
    fn eval_f_examples() {
        let p = build_potential(5.0, 2.5, 1000).unwrap();
        assert!((eval_f(&p, &[3.0; 4]) - 36.0 * p.b).abs() < 1e-13);
        assert!((eval_f(&p, &[0.0; 3]) - 3.0 * (-12.5f64).exp()).abs() < 1e-18);
        let v = eval_f(&p, &[1.0, 3.0]);
        assert!((v - ((5.0 * (1.0 - 2.5f64)).exp() + 9.0 * p.b)).abs() < 1e-14);
        assert!((eval_log_f(&p, &[1.0, 3.0]) - v.ln()).abs() < 1e-14);
    }

    #[test]
    fn gronwall_examples() {
        assert_eq!(gronwall_envelope(5.0, 0.3, 0.3).unwrap(), ExtReal::ONE);
        let t1 = 0.01;
        let lf = gronwall_envelope(5.0, t1, 4.0 * t1).unwrap().ln_abs_f64();
        let expect = 500.0 * 4f64.ln() + 7200.0 * 3f64.sqrt() * t1.sqrt();
        assert!((lf - expect).abs() < 1e-12 * expect);
        assert!(gronwall_envelope(5.0, 0.0, 0.1).is_err());
        assert!(gronwall_envelope(5.0, 0.2, 0.1).is_err());
    }

    #[test]
    fn gronwall_proof_domination() {
        for k in 0..=30 {
            let p = 10f64.powf(3.0 + 3.0 * k as f64 / 30.0);
            assert!(gronwall_proof_check(p).unwrap().pass, "{p}");
        }
    }

    #[test]
    fn handoff_empty_middle_band() {
        let next = build_potential(50.0, 8.0 / 3.0, 1000).unwrap();
        let r = handoff_check(&next, B_MIN, 8.0 / 3.0, 2000).unwrap();
        assert!(r.worst_lambda > 8.0 / 3.0);
        assert_eq!(r.pass, next.b <= 4.0 * B_MIN);
    }
}
