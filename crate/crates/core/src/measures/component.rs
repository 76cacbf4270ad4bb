//! One-dimensional log-concave components and the moments of their tilts.
//!
//! Every component is stored as a list of contiguous pieces on which the
//! log-density is a concave quadratic `c + β y - γ y²/2`. Tilting by
//! `θ y - t y²/2` keeps that form (`β += θ`, `γ += t`), so tilted moments
//! reduce to a sum of smooth one-dimensional integrals. Those are evaluated
//! with 16-point Gauss–Legendre on panels across which the log-density drops
//! by at most [`PANEL_DROP`], after discarding the region more than
//! [`TRUNCATION_NATS`] below the global peak.

use std::f64::consts::PI;

use crate::error::{LoclabError, Result};
use crate::numerics::{adaptive_quad, GaussLegendre, Support};

/// Mass below `e^-36` of the peak density is dropped (relative error ~1e-16).
pub const TRUNCATION_NATS: f64 = 36.0;
/// Largest log-density drop across one quadrature panel.
pub const PANEL_DROP: f64 = 8.0;
/// Relative tolerance of the quadrature used for standardization.
pub const STANDARDIZATION_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub c: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Piece {
    #[inline]
    pub fn log_density(&self, y: f64) -> f64 {
        self.c + y * (self.beta - 0.5 * self.gamma * y)
    }

    /// The support split at the maximizer, so each part is monotone.
    fn supports(&self) -> Vec<Support> {
        let m = argmax(self.lo, self.hi, self.beta, self.gamma);
        let side = |a: f64, b: f64| match (a.is_finite(), b.is_finite()) {
            (true, true) => Support::Finite(a, b),
            (true, false) => Support::Above(a),
            (false, true) => Support::Below(b),
            (false, false) => Support::Whole(0.0),
        };
        if m.is_finite() && self.lo < m && m < self.hi {
            vec![side(self.lo, m), side(m, self.hi)]
        } else {
            vec![side(self.lo, self.hi)]
        }
    }

    /// The same density in the variable `y` with `x = shift + scale * y`,
    /// including the Jacobian.
    fn affine(&self, shift: f64, scale: f64) -> Piece {
        let (b, g) = (self.beta, self.gamma);
        Piece {
            lo: (self.lo - shift) / scale,
            hi: (self.hi - shift) / scale,
            c: scale.ln() + self.c + b * shift - 0.5 * g * shift * shift,
            beta: (b - g * shift) * scale,
            gamma: g * scale * scale,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ComponentKind {
    Gaussian,
    Uniform { a: f64, b: f64 },
    TwoSidedExponential { rate: f64 },
    GridLogDensity { xs: Vec<f64>, log_density: Vec<f64> },
}

impl ComponentKind {
    fn raw_pieces(&self) -> Result<Vec<Piece>> {
        let inf = f64::INFINITY;
        match self {
            ComponentKind::Gaussian => Ok(vec![Piece {
                lo: -inf,
                hi: inf,
                c: -0.5 * (2.0 * PI).ln(),
                beta: 0.0,
                gamma: 1.0,
            }]),
            &ComponentKind::Uniform { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(LoclabError::ModelSpec(format!("uniform needs a < b, got [{a}, {b}]")));
                }
                Ok(vec![Piece {
                    lo: a,
                    hi: b,
                    c: -(b - a).ln(),
                    beta: 0.0,
                    gamma: 0.0,
                }])
            }
            &ComponentKind::TwoSidedExponential { rate } => {
                if !(rate.is_finite() && rate > 0.0) {
                    return Err(LoclabError::ModelSpec(format!("exponential rate must be positive, got {rate}")));
                }
                let c = (0.5 * rate).ln();
                Ok(vec![
                    Piece { lo: -inf, hi: 0.0, c, beta: rate, gamma: 0.0 },
                    Piece { lo: 0.0, hi: inf, c, beta: -rate, gamma: 0.0 },
                ])
            }
            ComponentKind::GridLogDensity { xs, log_density } => grid_pieces(xs, log_density),
        }
    }
}

fn grid_pieces(xs: &[f64], ls: &[f64]) -> Result<Vec<Piece>> {
    if xs.len() != ls.len() || xs.len() < 2 {
        return Err(LoclabError::ModelSpec("grid needs at least two (x, log density) samples".into()));
    }
    if xs.iter().chain(ls).any(|v| !v.is_finite()) {
        return Err(LoclabError::ModelSpec("grid samples must be finite".into()));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LoclabError::ModelSpec("grid x values must be strictly ascending".into()));
    }
    let slopes: Vec<f64> = (0..xs.len() - 1)
        .map(|i| (ls[i + 1] - ls[i]) / (xs[i + 1] - xs[i]))
        .collect();
    let scale = slopes.iter().fold(1.0f64, |m, s| m.max(s.abs()));
    for (i, w) in slopes.windows(2).enumerate() {
        if w[1] > w[0] + 1e-12 * scale {
            return Err(LoclabError::ModelSpec(format!(
                "grid log density is not concave at x = {}",
                xs[i + 1]
            )));
        }
    }
    Ok(slopes
        .iter()
        .enumerate()
        .map(|(i, &s)| Piece {
            lo: xs[i],
            hi: xs[i + 1],
            c: ls[i] - s * xs[i],
            beta: s,
            gamma: 0.0,
        })
        .collect())
}

/// `x = shift + scale * y` maps the standardized variable `y` to the raw one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Standardization {
    pub shift: f64,
    pub scale: f64,
}

/// Moments of a tilted one-dimensional component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TiltMoments1D {
    pub mean: f64,
    pub var: f64,
    pub log_z: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component1D {
    kind: ComponentKind,
    standardization: Standardization,
    pieces: Vec<Piece>,
}

impl Component1D {
    /// Builds the component standardized to mean 0 and variance 1.
    pub fn new(kind: ComponentKind) -> Result<Self> {
        Self::build(kind, true)
    }

    /// Normalized to unit mass but left at its raw location and scale.
    pub fn unstandardized(kind: ComponentKind) -> Result<Self> {
        Self::build(kind, false)
    }

    pub fn standard_gaussian() -> Self {
        Self::new(ComponentKind::Gaussian).expect("gaussian component")
    }

    fn build(kind: ComponentKind, standardize: bool) -> Result<Self> {
        let raw = kind.raw_pieces()?;
        let (log_mass, mean, var) = raw_moments(&raw)?;
        let standardization = if standardize {
            Standardization { shift: mean, scale: var.sqrt() }
        } else {
            Standardization { shift: 0.0, scale: 1.0 }
        };
        let Standardization { shift, scale } = standardization;
        let pieces = raw
            .iter()
            .map(|p| {
                let mut q = p.affine(shift, scale);
                q.c -= log_mass;
                q
            })
            .collect();
        Ok(Component1D { kind, standardization, pieces })
    }

    pub fn kind(&self) -> &ComponentKind {
        &self.kind
    }

    pub fn standardization(&self) -> Standardization {
        self.standardization
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Symmetry of the density about 0, checked on a grid over the support.
    pub fn is_symmetric(&self) -> bool {
        let lo = self.pieces.first().map_or(0.0, |p| p.lo);
        let hi = self.pieces.last().map_or(0.0, |p| p.hi);
        if (lo + hi).abs() > 1e-12 * (1.0 + hi.abs()) && lo.is_finite() {
            return false;
        }
        let reach = if hi.is_finite() { hi * (1.0 - 1e-9) } else { 20.0 };
        (0..=64).all(|k| {
            let y = reach * k as f64 / 64.0;
            let (a, b) = (self.log_density(y), self.log_density(-y));
            a == b || (a - b).abs() <= 1e-10 * (1.0 + a.abs())
        })
    }

    /// Log-density of the (standardized) component; `-inf` off the support.
    pub fn log_density(&self, y: f64) -> f64 {
        self.pieces
            .iter()
            .find(|p| p.lo <= y && y <= p.hi)
            .map_or(f64::NEG_INFINITY, |p| p.log_density(y))
    }

    /// Mean, variance and log-partition of `ρ(y) e^{θy - ty²/2}`.
    pub fn tilt(&self, theta: f64, t: f64) -> Result<TiltMoments1D> {
        if let ComponentKind::Gaussian = self.kind {
            let s = 1.0 + t;
            return Ok(TiltMoments1D {
                mean: theta / s,
                var: 1.0 / s,
                log_z: theta * theta / (2.0 * s) - 0.5 * s.ln(),
            });
        }
        self.tilt_pieces(theta, t)
    }

    /// The piecewise engine, also used for Gaussian components in tests.
    pub fn tilt_pieces(&self, theta: f64, t: f64) -> Result<TiltMoments1D> {
        if !(theta.is_finite() && t.is_finite() && t >= 0.0) {
            return Err(LoclabError::InvalidArgument(format!("tilt ({theta}, {t})")));
        }
        let mut peak = f64::NEG_INFINITY;
        let mut y_ref = 0.0;
        for p in &self.pieces {
            let (b, g) = (p.beta + theta, p.gamma + t);
            if g == 0.0 && ((p.hi == f64::INFINITY && b >= 0.0) || (p.lo == f64::NEG_INFINITY && b <= 0.0)) {
                return Err(LoclabError::DivergentTilt { coord: 0, theta });
            }
            let ym = argmax(p.lo, p.hi, b, g);
            let l = p.c + ym * (b - 0.5 * g * ym);
            if l > peak {
                peak = l;
                y_ref = ym;
            }
        }
        let floor = peak - TRUNCATION_NATS;
        let mut acc = Accumulator { peak, y_ref, s0: 0.0, s1: 0.0, s2: 0.0 };
        for p in &self.pieces {
            let (b, g) = (p.beta + theta, p.gamma + t);
            let ym = argmax(p.lo, p.hi, b, g);
            let lm = p.c + ym * (b - 0.5 * g * ym);
            if lm <= floor {
                continue;
            }
            let slope = b - g * ym;
            let shape = Shape { lm, slope, g };
            if p.hi > ym {
                acc.side(&shape, ym, p.hi - ym, 1.0, (-slope).max(0.0), lm - floor);
            }
            if p.lo < ym {
                acc.side(&shape, ym, ym - p.lo, -1.0, slope.max(0.0), lm - floor);
            }
        }
        let m1 = acc.s1 / acc.s0;
        Ok(TiltMoments1D {
            mean: y_ref + m1,
            var: acc.s2 / acc.s0 - m1 * m1,
            log_z: peak + acc.s0.ln(),
        })
    }

    /// Tilted moments by adaptive quadrature, independent of the panel engine.
    pub fn tilt_quadrature(&self, theta: f64, t: f64, rel_tol: f64) -> Result<TiltMoments1D> {
        let tilted: Vec<Piece> = self
            .pieces
            .iter()
            .map(|p| Piece { beta: p.beta + theta, gamma: p.gamma + t, ..*p })
            .collect();
        let (log_z, mean, var) = quadrature_moments(&tilted, rel_tol)?;
        Ok(TiltMoments1D { mean, var, log_z })
    }
}

/// A tilted piece expanded about its maximizer `ym`,
/// `ℓ(y) = lm + slope·d - g d²/2` with `d = y - ym`.
struct Shape {
    lm: f64,
    slope: f64,
    g: f64,
}

struct Accumulator {
    peak: f64,
    y_ref: f64,
    s0: f64,
    s1: f64,
    s2: f64,
}

impl Accumulator {
    /// Integrates from `y0` outward over `len` in direction `dir`, along which
    /// the log-density decreases with initial slope magnitude `s`.
    fn side(&mut self, q: &Shape, y0: f64, len: f64, dir: f64, s: f64, budget: f64) {
        let gl = GaussLegendre::sixteen();
        let mut x_prev = 0.0;
        let mut k = 1.0;
        loop {
            let drop = (PANEL_DROP * k).min(budget);
            // distance at which the log-density has fallen by `drop`
            let x = (2.0 * drop / (s + (s * s + 2.0 * q.g * drop).sqrt())).min(len);
            if x > x_prev {
                let mid = 0.5 * (x_prev + x);
                let half = 0.5 * (x - x_prev);
                for (&node, &w) in gl.nodes.iter().zip(&gl.weights) {
                    let d = dir * (mid + half * node);
                    let y = y0 + d;
                    let e = (q.lm - self.peak + d * (q.slope - 0.5 * q.g * d)).exp() * w * half;
                    let d = y - self.y_ref;
                    self.s0 += e;
                    self.s1 += e * d;
                    self.s2 += e * d * d;
                }
            }
            if x >= len || drop >= budget {
                return;
            }
            x_prev = x;
            k += 1.0;
        }
    }
}

/// Maximizer of `b y - g y²/2` on `[lo, hi]`.
#[inline]
fn argmax(lo: f64, hi: f64, b: f64, g: f64) -> f64 {
    if g > 0.0 {
        (b / g).clamp(lo, hi)
    } else if b > 0.0 {
        hi
    } else if b < 0.0 || lo.is_finite() {
        lo
    } else {
        hi
    }
}

fn raw_moments(pieces: &[Piece]) -> Result<(f64, f64, f64)> {
    let (log_mass, mean, var) = quadrature_moments(pieces, STANDARDIZATION_TOL)?;
    if !(var > 0.0 && log_mass.is_finite() && var.is_finite()) {
        return Err(LoclabError::ModelSpec("component is not a proper density".into()));
    }
    Ok((log_mass, mean, var))
}

/// Log-mass, mean and variance of `exp(Σ pieces)` by adaptive Simpson, with the
/// variance computed about the mean in a second pass.
fn quadrature_moments(pieces: &[Piece], rel_tol: f64) -> Result<(f64, f64, f64)> {
    let peak = pieces
        .iter()
        .map(|p| {
            if p.gamma == 0.0
                && ((p.hi == f64::INFINITY && p.beta >= 0.0) || (p.lo == f64::NEG_INFINITY && p.beta <= 0.0))
            {
                f64::INFINITY
            } else {
                p.log_density(argmax(p.lo, p.hi, p.beta, p.gamma))
            }
        })
        .fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::INFINITY {
        return Err(LoclabError::DivergentIntegral);
    }
    let moment = |k: i32, centre: f64| -> Result<f64> {
        let mut total = 0.0;
        for p in pieces {
            let m = argmax(p.lo, p.hi, p.beta, p.gamma);
            let (lm, slope) = (p.log_density(m) - peak, p.beta - p.gamma * m);
            for support in p.supports() {
                total += adaptive_quad(
                    |y| {
                        let d = y - m;
                        (lm + d * (slope - 0.5 * p.gamma * d)).exp() * (y - centre).powi(k)
                    },
                    support,
                    rel_tol,
                )?;
            }
        }
        Ok(total)
    };
    let m0 = moment(0, 0.0)?;
    let mean = moment(1, 0.0)? / m0;
    let var = moment(2, mean)? / m0;
    Ok((m0.ln() + peak, mean, var))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dexp() -> Component1D {
        Component1D::new(ComponentKind::TwoSidedExponential { rate: 1.0 }).unwrap()
    }

    fn uniform() -> Component1D {
        Component1D::new(ComponentKind::Uniform { a: 0.0, b: 1.0 }).unwrap()
    }

    #[test]
    fn standardized_components_are_isotropic() {
        for c in [dexp(), uniform(), Component1D::standard_gaussian()] {
            let m = c.tilt_pieces(0.0, 0.0).unwrap();
            assert!(m.mean.abs() < 1e-10, "{:?}", c.kind());
            assert!((m.var - 1.0).abs() < 1e-10, "{:?}", c.kind());
            assert!(m.log_z.abs() < 1e-10, "{:?}", c.kind());
        }
    }

    #[test]
    fn uniform_standardizes_to_symmetric_interval() {
        let c = uniform();
        let p = c.pieces()[0];
        let s3 = 3f64.sqrt();
        assert!((p.lo + s3).abs() < 1e-12 && (p.hi - s3).abs() < 1e-12);
        assert!((p.c + (2.0 * s3).ln()).abs() < 1e-12);
    }

    #[test]
    fn dexp_standardizes_to_rate_sqrt_two() {
        let c = dexp();
        assert!((c.pieces()[1].beta + 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gaussian_engine_matches_closed_form() {
        let c = Component1D::standard_gaussian();
        for &(th, t) in &[(0.0, 0.0), (1.0, 1.0), (-3.0, 0.2), (10.0, 0.001)] {
            let a = c.tilt_pieces(th, t).unwrap();
            let b = c.tilt(th, t).unwrap();
            assert!((a.mean - b.mean).abs() < 1e-11 * (1.0 + b.mean.abs()));
            assert!((a.var / b.var - 1.0).abs() < 1e-12);
            assert!((a.log_z - b.log_z).abs() < 1e-11 * (1.0 + b.log_z.abs()));
        }
    }

    #[test]
    fn engine_matches_quadrature_oracle() {
        for c in [dexp(), uniform()] {
            for &(th, t) in &[(0.3, 0.0), (-1.2, 0.0), (2.0, 0.5), (-7.0, 1.0), (25.0, 0.001), (0.0, 4.0)] {
                let a = c.tilt_pieces(th, t).unwrap();
                let b = c.tilt_quadrature(th, t, 1e-12).unwrap_or_else(|e| panic!("{e} {:?} {th} {t}", c.kind()));
                assert!((a.mean - b.mean).abs() < 1e-9 * (1.0 + b.mean.abs()), "{:?} {th} {t}", c.kind());
                assert!((a.var / b.var - 1.0).abs() < 1e-9, "{:?} {th} {t}", c.kind());
                assert!((a.log_z - b.log_z).abs() < 1e-9 * (1.0 + b.log_z.abs()), "{:?} {th} {t}", c.kind());
            }
        }
    }

    #[test]
    fn exponential_tilt_closed_form_at_time_zero() {
        // Laplace with rate r: log Z(θ) = ln(r² / (r² - θ²)), mean 2θ/(r² - θ²)
        let c = dexp();
        let r2 = 2.0;
        for th in [0.5, -1.0, 1.4] {
            let m = c.tilt(th, 0.0).unwrap();
            assert!((m.log_z - (r2 / (r2 - th * th)).ln()).abs() < 1e-12);
            assert!((m.mean - 2.0 * th / (r2 - th * th)).abs() < 1e-9 * (1.0 + m.mean.abs()));
        }
    }

    #[test]
    fn heavy_tilt_at_time_zero_diverges() {
        let r = dexp().tilt(1.5, 0.0);
        assert!(matches!(r, Err(LoclabError::DivergentTilt { .. })));
        assert!(dexp().tilt(1.5, 1e-3).is_ok());
    }

    #[test]
    fn grid_component_matches_its_continuous_source() {
        // The log density of a Laplace law is piecewise linear, so a grid on
        // [-40, 40] with a knot at 0 reproduces it up to truncation.
        let xs: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.1).collect();
        let ls: Vec<f64> = xs.iter().map(|x: &f64| -x.abs()).collect();
        let g = Component1D::new(ComponentKind::GridLogDensity { xs, log_density: ls }).unwrap();
        let d = dexp();
        for &(th, t) in &[(0.0, 0.0), (0.7, 0.1), (-2.0, 1.0)] {
            let a = g.tilt(th, t).unwrap();
            let b = d.tilt(th, t).unwrap();
            assert!((a.mean - b.mean).abs() < 1e-8 && (a.var - b.var).abs() < 1e-8);
        }
    }

    #[test]
    fn non_concave_grid_is_rejected() {
        let kind = ComponentKind::GridLogDensity {
            xs: vec![0.0, 1.0, 2.0, 3.0],
            log_density: vec![0.0, -1.0, -1.5, -3.0],
        };
        assert!(matches!(Component1D::new(kind), Err(LoclabError::ModelSpec(_))));
    }

    #[test]
    fn unstandardized_uniform_keeps_its_mean() {
        let c = Component1D::unstandardized(ComponentKind::Uniform { a: 0.0, b: 1.0 }).unwrap();
        let m = c.tilt(0.0, 0.0).unwrap();
        assert!((m.mean - 0.5).abs() < 1e-12);
        assert!((m.var - 1.0 / 12.0).abs() < 1e-12);
    }
}
