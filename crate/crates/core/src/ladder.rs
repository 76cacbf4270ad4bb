//! The time ladder between `p⁻⁸` and the operator-norm window
//! `t* = C1⁻¹ (log n)⁻²`, its threshold sequence, and certification of the
//! explicit constant inequalities used along it.
//!
//! Rungs are stored through `u = |log t|`, so `t = e^{-u}` with `u` an
//! [`ExtReal`]. The backward recursion `t*_{k+1} = exp(-(t*_k)^{-1/16})`
//! reads `u*_{k+1} = exp(u*_k / 16)`.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{LoclabError, Result};
use crate::numerics::ExtReal;
use crate::potentials::{build_potential, handoff_check, HandoffReport, Potential};

pub const MAX_RUNGS: usize = 64;
pub const S_FIRST: f64 = 7.0 / 3.0;
pub const S_BOUND: f64 = 15.0 / 6.0;
/// `ln p` from which `t*_1 = p⁻⁸ ≤ e^{-1000}`.
pub const REGIME_LN_P: f64 = 125.0;
/// Points of the log-grid on which the monotonicity of the `|log t|³`
/// inequality is certified.
pub const DOMINATION_GRID: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KZeroReading {
    /// `k0` is the first backward index with `t*_k ≤ t*`.
    #[default]
    FirstCrossing,
    /// `k0 = sup{k : t*_k ≤ t*}` taken literally.
    LiteralSup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    SingleStage,
    MultiStage,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ladder {
    pub ln_p: f64,
    pub ln_n: f64,
    pub c1: f64,
    pub t_star: ExtReal,
    pub t1_star: ExtReal,
    pub branch: Branch,
    /// Forward rungs `t_1 < … < t_{k0}`.
    pub t: Vec<ExtReal>,
    /// `|log t_k|` for the forward rungs.
    pub log_t_abs: Vec<ExtReal>,
    /// `s_1 … s_{k0-1}`.
    pub s: Vec<f64>,
    /// `s_{k+1} - s_k = |log t_{k+1}|^{-1/2}`, kept exactly.
    pub s_increments: Vec<ExtReal>,
    pub k0: Option<usize>,
}

fn ext(x: f64) -> ExtReal {
    ExtReal::from_f64(x)
}

/// `ln(e^a + e^b)` for extended reals.
pub fn log_sum_exp(a: ExtReal, b: ExtReal) -> ExtReal {
    let (hi, lo) = if a.total_cmp(&b) == Ordering::Less { (b, a) } else { (a, b) };
    let d = lo.sub(&hi).to_f64();
    if d < -80.0 {
        hi
    } else {
        hi.add(&ext(d.exp().ln_1p()))
    }
}

/// `|log t*| = ln C1 + 2 ln ln n`.
fn u_star(ln_n: f64, c1: f64) -> f64 {
    c1.ln() + 2.0 * ln_n.ln()
}

/// Builds the ladder from `ln p`, `ln n` and `C1`.
pub fn build_ladder(ln_p: f64, ln_n: f64, c1: f64, reading: KZeroReading) -> Result<Ladder> {
    if !(ln_p > 4f64.ln() && ln_p.is_finite()) {
        return Err(LoclabError::InvalidArgument(format!("need p > 4, got ln p = {ln_p}")));
    }
    if !(ln_n >= 2f64.ln() && ln_n.is_finite()) {
        return Err(LoclabError::InvalidArgument(format!("need n >= 2, got ln n = {ln_n}")));
    }
    if !(c1 > 0.0 && c1.is_finite()) {
        return Err(LoclabError::InvalidArgument(format!("need C1 > 0, got {c1}")));
    }
    let us = ext(u_star(ln_n, c1));
    let u1 = ext(8.0 * ln_p);
    let t_star = us.neg().exp();
    let t1_star = u1.neg().exp();
    let mut ladder = Ladder {
        ln_p,
        ln_n,
        c1,
        t_star,
        t1_star,
        branch: Branch::SingleStage,
        t: Vec::new(),
        log_t_abs: Vec::new(),
        s: Vec::new(),
        s_increments: Vec::new(),
        k0: None,
    };
    // p⁻⁸ ≤ t*  ⟺  u*_1 ≥ u*
    if u1.total_cmp(&us) != Ordering::Less {
        return Ok(ladder);
    }
    if reading == KZeroReading::LiteralSup {
        return Err(LoclabError::LadderNotContracting(
            "sup{k : t*_k <= t*} is unbounded: once below t* the backward sequence stays below".into(),
        ));
    }
    let mut backward = vec![u1];
    loop {
        let next = backward.last().unwrap().mul_f64(1.0 / 16.0).exp();
        if next.is_beyond() {
            return Err(LoclabError::LadderTooDeep {
                depth: backward.len(),
                detail: "ladder exceeds representable depth".into(),
            });
        }
        if next.total_cmp(backward.last().unwrap()) != Ordering::Greater {
            return Err(LoclabError::LadderNotContracting(format!(
                "|log t*_k| stops growing at rung {} (ln p = {ln_p} too small)",
                backward.len() + 1
            )));
        }
        backward.push(next);
        if next.total_cmp(&us) != Ordering::Less {
            break;
        }
        if backward.len() >= MAX_RUNGS {
            return Err(LoclabError::LadderTooDeep {
                depth: backward.len(),
                detail: format!("no crossing of t* within {MAX_RUNGS} rungs"),
            });
        }
    }
    let k0 = backward.len();
    backward.reverse();
    ladder.t = backward.iter().map(|u| u.neg().exp()).collect();
    ladder.log_t_abs = backward;

    let mut s = S_FIRST;
    ladder.s.push(s);
    for i in 1..k0.saturating_sub(1) {
        let inc = ladder.log_t_abs[i].powf(-0.5);
        s += inc.to_f64();
        ladder.s.push(s);
        ladder.s_increments.push(inc);
    }
    if let Some(&last) = ladder.s.last() {
        if last > S_BOUND {
            return Err(LoclabError::LadderThresholdBound { s: last });
        }
    }
    ladder.k0 = Some(k0);
    ladder.branch = Branch::MultiStage;
    Ok(ladder)
}

impl Ladder {
    /// Largest log-space mismatch of `t_{k+1} = |log t_k|^{-16}` over the rungs.
    pub fn inversion_residual(&self) -> f64 {
        self.t
            .windows(2)
            .map(|w| {
                let forward = w[0].ln().abs().powf(-16.0);
                forward.log_rel_diff(&w[1])
            })
            .fold(0.0, f64::max)
    }

    /// Potentials `f_1 … f_{k0}`: `r0 = s_k`, `D0 = |log t_k|⁴` for `k < k0`,
    /// and `r0 = 8/3`, `D0 = p` at the last rung. `D0` saturates at
    /// `f64::MAX`; the bridge certificate does not depend on its size.
    pub fn potentials(&self, grid_points: usize) -> Result<Vec<Potential>> {
        let k0 = self.k0.ok_or_else(|| LoclabError::InvalidArgument("single-stage ladder has no rungs".into()))?;
        let mut out = Vec::with_capacity(k0);
        for k in 0..k0 - 1 {
            let d0 = self.log_t_abs[k].powf(4.0).to_f64().min(f64::MAX);
            out.push(build_potential(d0, self.s[k], grid_points)?);
        }
        out.push(build_potential(ext(self.ln_p).exp().to_f64().min(f64::MAX), 8.0 / 3.0, grid_points)?);
        Ok(out)
    }

    /// Handoff certificates for every adjacent pair of rung potentials.
    pub fn handoff_chain(&self, grid_points: usize) -> Result<Vec<HandoffReport>> {
        let pots = self.potentials(grid_points)?;
        pots.windows(2)
            .enumerate()
            .map(|(k, w)| handoff_check(&w[1], w[0].b, self.s[k], grid_points))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    /// `log(rhs) - log(lhs)` or the analogous slack; non-negative on pass.
    pub margin: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub ln_p: f64,
    pub ln_n: f64,
    pub c1: f64,
    pub checks: Vec<InequalityCheck>,
    /// True when some inequality fails because `p` is below its threshold.
    pub regime: bool,
    /// Smallest `ln p` at which the exponential-sum inequality holds.
    pub exp_sum_threshold_ln_p: f64,
}

/// `log(rhs) - log(lhs)` of
/// `e^{10⁴ log p + 11p/18} (e^{-2p/3} + e^{-(C1 t*_1)⁻¹}) ≤ e^{-p/20}`.
pub fn exp_sum_margin(ln_p: f64, c1: f64) -> ExtReal {
    let p = ExtReal::from_ln(ln_p);
    let p8 = ExtReal::from_ln(8.0 * ln_p - c1.ln());
    let lhs = ext(1e4 * ln_p)
        .add(&p.mul_f64(11.0 / 18.0))
        .add(&log_sum_exp(p.mul_f64(-2.0 / 3.0), p8.neg()));
    p.mul_f64(-1.0 / 20.0).sub(&lhs)
}

/// Smallest `ln p` (to relative precision 1e-12) at which [`exp_sum_margin`]
/// is non-negative, found by bisection.
pub fn exp_sum_threshold(c1: f64) -> Result<f64> {
    let passes = |lp: f64| exp_sum_margin(lp, c1).sign() >= 0;
    let mut lo = 4f64.ln();
    if passes(lo) {
        return Ok(lo);
    }
    let mut hi = 2.0;
    while !passes(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(LoclabError::NoConvergence("no passing p below exp(1e6)"));
        }
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `ln(e^u / C1) - ln(k1 u^m1 + k2 u^m2)`-style margins used for
/// `(C1 t)⁻¹ - 1002 |log t| - |log t|³ ≥ 0` with `u = |log t|`.
fn domination_value_margin(u: f64, c1: f64) -> f64 {
    // ln(1002 u + u³) = ln u + 2 ln u + ln(1 + 1002/u²)
    (u - c1.ln()) - (3.0 * u.ln() + (1002.0 / (u * u)).ln_1p())
}

fn domination_slope_margin(u: f64, c1: f64) -> f64 {
    // d/du: e^u / C1 - 1002 - 3u²
    (u - c1.ln()) - (3f64.ln() + 2.0 * u.ln() + (334.0 / (u * u)).ln_1p())
}

fn domination_curvature_margin(u: f64, c1: f64) -> f64 {
    (u - c1.ln()) - (6.0 * u).ln()
}

/// Certifies `G(u) = e^u/C1 - 1002u - u³ ≥ 0` for all `u ≥ u*`: `G(u*) ≥ 0`,
/// `G' ≥ 0` on a log-grid over `[u*, 10 u*]`, and at the grid end `G'' ≥ 0`
/// with `u ≥ ln(6 C1)`, so `G'` keeps increasing beyond it.
pub fn log_domination_check(ln_n: f64, c1: f64) -> InequalityCheck {
    let us = u_star(ln_n, c1).max(f64::MIN_POSITIVE);
    let top = 10.0 * us;
    let value = domination_value_margin(us, c1);
    let mut slope = f64::INFINITY;
    for k in 0..DOMINATION_GRID {
        let u = us * (top / us).powf(k as f64 / (DOMINATION_GRID - 1) as f64);
        slope = slope.min(domination_slope_margin(u, c1));
    }
    let curvature = domination_curvature_margin(top, c1);
    let tail = top >= (6.0 * c1).ln();
    let margin = value.min(slope).min(curvature);
    InequalityCheck {
        name: "log_domination",
        margin,
        pass: margin >= 0.0 && tail,
        detail: format!("value {value:.6e}, min slope {slope:.6e}, curvature at 10u* {curvature:.6e}"),
    }
}

/// All three constant inequalities at `(p, n, C1)`.
pub fn check_constants(ln_p: f64, ln_n: f64, c1: f64) -> Result<ConstantsReport> {
    if !(c1 > 0.0) {
        return Err(LoclabError::InvalidArgument(format!("need C1 > 0, got {c1}")));
    }
    let m_exp = exp_sum_margin(ln_p, c1);
    let exp_sum = InequalityCheck {
        name: "exp_sum",
        margin: m_exp.to_f64(),
        pass: m_exp.sign() >= 0,
        detail: format!("log rhs - log lhs = {m_exp}"),
    };
    let log_domination = log_domination_check(ln_n, c1);
    // t*_1 = p⁻⁸ ≤ e^{-1000}
    let m_regime = 8.0 * ln_p - 1000.0;
    let rung_regime = InequalityCheck {
        name: "rung_regime",
        margin: m_regime,
        pass: m_regime >= 0.0,
        detail: format!("|log t*_1| - 1000 = {m_regime}"),
    };
    let checks = vec![exp_sum, log_domination, rung_regime];
    let regime = checks.iter().any(|c| !c.pass);
    Ok(ConstantsReport {
        ln_p,
        ln_n,
        c1,
        checks,
        regime,
        exp_sum_threshold_ln_p: exp_sum_threshold(c1)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RungZeroCheck {
    pub log_t1_abs: ExtReal,
    pub lhs_log: ExtReal,
    pub rhs_log: ExtReal,
    pub pass: bool,
}

/// `e^{-D0/3 + 10³ u} n + e^{-u³} n ≤ e^{-u²} n` with `u = |log t1|`; the
/// rung uses `D0 = u⁴`.
pub fn rung_zero_check(t1: ExtReal, d0: ExtReal, c1: f64, ln_n: f64) -> Result<RungZeroCheck> {
    if !(c1 > 0.0) {
        return Err(LoclabError::InvalidArgument(format!("need C1 > 0, got {c1}")));
    }
    if t1.sign() <= 0 {
        return Err(LoclabError::InvalidArgument("t1 must be positive".into()));
    }
    let u = t1.ln().neg();
    if u.total_cmp(&ext(1000.0)) == Ordering::Less {
        return Err(LoclabError::InvalidArgument(format!(
            "t1 = exp(-{}) lies outside the regime t1 <= exp(-1000)",
            u.to_f64()
        )));
    }
    let n = ext(ln_n);
    let first = d0.mul_f64(-1.0 / 3.0).add(&u.mul_f64(1000.0));
    let second = u.powf(3.0).neg();
    let lhs_log = log_sum_exp(first, second).add(&n);
    let rhs_log = u.powf(2.0).neg().add(&n);
    Ok(RungZeroCheck {
        log_t1_abs: u,
        pass: lhs_log.total_cmp(&rhs_log) != Ordering::Greater,
        lhs_log,
        rhs_log,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RungBound {
    pub k: usize,
    /// `ln(e^{-|log t_k|²} n)`.
    pub log_bound: ExtReal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InductionTargets {
    pub rungs: Vec<RungBound>,
    /// `ln(e^{-(t*_1)^{-1/8}} n)`.
    pub final_log_bound: ExtReal,
    /// Log-space distance between `(t*_1)^{-1/8}` and `p`.
    pub identity_residual: f64,
    /// Log-space distance between the last rung bound and the final bound.
    pub consistency_residual: f64,
}

/// Rung bounds `e^{-(log t_k)²} n` for `k < k0` and the final `e^{-p} n`.
pub fn induction_targets(ladder: &Ladder) -> Result<InductionTargets> {
    let k0 = ladder
        .k0
        .ok_or_else(|| LoclabError::InvalidArgument("induction targets need a multi-stage ladder".into()))?;
    let n = ext(ladder.ln_n);
    let rungs: Vec<RungBound> = (0..k0 - 1)
        .map(|k| RungBound {
            k: k + 1,
            log_bound: ladder.log_t_abs[k].powf(2.0).neg().add(&n),
        })
        .collect();
    let exponent = ladder.t1_star.powf(-1.0 / 8.0);
    let p = ExtReal::from_ln(ladder.ln_p);
    let final_log_bound = exponent.neg().add(&n);
    let identity_residual = exponent.log_rel_diff(&p);
    let consistency_residual = match rungs.last() {
        Some(last) if k0 >= 2 => {
            let last_sq = ladder.log_t_abs[k0 - 2].powf(2.0);
            last_sq.log_rel_diff(&exponent).max(last.log_bound.sub(&final_log_bound).to_f64().abs() / p.to_f64().max(1.0))
        }
        _ => 0.0,
    };
    Ok(InductionTargets { rungs, final_log_bound, identity_residual, consistency_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_ladder() -> Ladder {
        build_ladder(125.0, 1e300, 1.0, KZeroReading::FirstCrossing).unwrap()
    }

    #[test]
    fn second_backward_rung_at_e125() {
        let l = default_ladder();
        assert_eq!(l.k0, Some(2));
        // forward t_1 is the backward t*_2
        let expect = ExtReal::from_ln(62.5);
        assert!(l.log_t_abs[0].log_rel_diff(&expect) < 1e-30);
        assert!(l.t[1].log_rel_diff(&ExtReal::from_ln(-1000.0)) < 1e-30);
    }

    #[test]
    fn single_stage_when_p8_is_small_enough() {
        // u*_1 = 8 ln p = 40 ≥ 2 ln ln n for ln n = 10
        let l = build_ladder(5.0, 10.0, 1.0, KZeroReading::FirstCrossing).unwrap();
        assert_eq!(l.branch, Branch::SingleStage);
        assert!(l.t.is_empty() && l.k0.is_none());
    }

    #[test]
    fn small_p_does_not_contract() {
        assert!(matches!(
            build_ladder(2.0, 1e300, 1.0, KZeroReading::FirstCrossing),
            Err(LoclabError::LadderNotContracting(_))
        ));
    }

    #[test]
    fn literal_sup_reading_is_unbounded() {
        assert!(matches!(
            build_ladder(125.0, 1e300, 1.0, KZeroReading::LiteralSup),
            Err(LoclabError::LadderNotContracting(_))
        ));
    }

    #[test]
    fn deeper_ladders_and_inversion() {
        // small p forces several rungs before crossing t*
        for (lp, ln_n) in [(10.0, 1e300), (12.0, 1e100), (20.0, 1e50), (125.0, 1e300)] {
            let l = build_ladder(lp, ln_n, 1.0, KZeroReading::FirstCrossing).unwrap();
            assert!(l.inversion_residual() < 1e-28, "{lp}");
            assert!(*l.s.last().unwrap() <= S_BOUND);
            assert!(l.s_increments.iter().all(|d| d.sign() > 0));
            assert!(l.t.windows(2).all(|w| w[0].total_cmp(&w[1]) == Ordering::Less));
            assert!(l.t[0].total_cmp(&l.t_star) != Ordering::Greater);
        }
    }

    #[test]
    fn regime_boundary_and_small_p() {
        let r = check_constants(125.0, 1e300, 1.0).unwrap();
        assert!(r.checks[2].pass && r.checks[2].margin == 0.0);
        let r = check_constants(1e3f64.ln(), 1e300, 1.0).unwrap();
        assert!(!r.checks[0].pass && r.regime);
        // log lhs ≈ 69078 + 611 - 667, log rhs = -50
        let m = exp_sum_margin(1e3f64.ln(), 1.0).to_f64();
        let lhs = 1e4 * 1e3f64.ln() + 11e3 / 18.0 - 2e3 / 3.0;
        assert!((m - (-50.0 - lhs)).abs() < 1e-9 * lhs);
    }

    #[test]
    fn exp_sum_threshold_and_monotonicity() {
        let th = exp_sum_threshold(1.0).unwrap();
        let p = th.exp();
        assert!((2e7..5e7).contains(&p), "{p}");
        assert!(exp_sum_margin(th, 1.0).sign() >= 0);
        assert!(exp_sum_margin(th * (1.0 - 1e-9), 1.0).sign() < 0);
        for k in 1..200 {
            assert!(exp_sum_margin(th + 0.5 * k as f64, 1.0).sign() >= 0);
        }
        assert!(check_constants(125.0, 1e300, 1.0).unwrap().checks.iter().all(|c| c.pass));
    }

    #[test]
    fn log_domination_fails_for_tiny_window() {
        // u* = 2 ln ln n small: e^u is not yet above u³
        assert!(!log_domination_check(20.0, 1.0).pass);
        assert!(log_domination_check(1e300, 1.0).pass);
    }

    #[test]
    fn rung_zero_examples() {
        let t = |u: f64| ExtReal::from_ln(-u);
        let d0 = |u: f64| ExtReal::from_f64(u).powf(4.0);
        assert!(rung_zero_check(t(1e3), d0(1e3), 1.0, 0.0).unwrap().pass);
        assert!(rung_zero_check(t(1e4), d0(1e4), 1.0, 5.0).unwrap().pass);
        assert!(rung_zero_check(t(10.0), d0(10.0), 1.0, 0.0).is_err());
        let r = rung_zero_check(t(1e3), d0(1e3), 1.0, 0.0).unwrap();
        assert!((r.lhs_log.to_f64() + 1e9).abs() < 1e-3);
    }

    #[test]
    fn induction_identity_in_log_space() {
        let l = default_ladder();
        let it = induction_targets(&l).unwrap();
        assert!(it.identity_residual < 1e-28);
        assert!(it.consistency_residual < 1e-28);
        assert_eq!(it.rungs.len(), 1);
        // rung with |log t| = 1000 gives e^{-10⁶} n
        let l2 = Ladder { log_t_abs: vec![ext(1000.0)], ..l.clone() };
        let b = l2.log_t_abs[0].powf(2.0).neg().to_f64();
        assert_eq!(b, -1e6);
    }

    #[test]
    fn default_handoff_chain_passes() {
        let reports = default_ladder().handoff_chain(2000).unwrap();
        assert_eq!(reports.len(), 1);
        assert!(reports.iter().all(|r| r.pass && r.worst_margin > 0.0));
    }
}
