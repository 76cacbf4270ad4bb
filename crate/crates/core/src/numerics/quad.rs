//! One-dimensional quadrature.
//!
//! [`adaptive_quad`] is an adaptive Simpson rule with interval bisection. On
//! unbounded supports it integrates outward in geometrically growing blocks
//! and truncates once a whole block sits below `e^-50` times the running
//! peak of the integrand.
//!
//! [`GaussLegendre`] provides fixed rules used by the tilted-moment engine.

use std::cell::Cell;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{LoclabError, Result};

/// Integration domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    Finite(f64, f64),
    /// `[a, +inf)`
    Above(f64),
    /// `(-inf, b]`
    Below(f64),
    /// The real line, split at the given point.
    Whole(f64),
}

/// `ln` of the relative truncation threshold on unbounded supports.
pub const TRUNCATION_LOG_RATIO: f64 = -50.0;
const MAX_DEPTH: u32 = 50;
const MAX_BLOCKS: usize = 80;
const INITIAL_PANELS: usize = 16;
/// Integrand evaluations allowed per call.
pub const EVALUATION_BUDGET: u64 = 20_000_000;

pub fn adaptive_quad<F: Fn(f64) -> f64>(g: F, support: Support, rel_tol: f64) -> Result<f64> {
    if !(1e-14..=1e-6).contains(&rel_tol) {
        return Err(LoclabError::InvalidArgument(format!(
            "rel_tol {rel_tol} outside [1e-14, 1e-6]"
        )));
    }
    let peak = Cell::new(0.0f64);
    let evals = Cell::new(0u64);
    let f = |x: f64| {
        evals.set(evals.get() + 1);
        if evals.get() > EVALUATION_BUDGET {
            return f64::NAN;
        }
        let v = g(x);
        let a = v.abs();
        if a > peak.get() {
            peak.set(a);
        }
        v
    };
    let result = match support {
        Support::Finite(a, b) => {
            if !(a.is_finite() && b.is_finite()) || a > b {
                return Err(LoclabError::InvalidArgument(format!(
                    "bad finite support [{a}, {b}]"
                )));
            }
            finite(&f, a, b, rel_tol)
        }
        Support::Above(a) => half_line(&f, a, 1.0, rel_tol, &peak),
        Support::Below(b) => half_line(&f, b, -1.0, rel_tol, &peak),
        Support::Whole(c) => {
            let right = half_line(&f, c, 1.0, rel_tol, &peak)?;
            let left = half_line(&f, c, -1.0, rel_tol, &peak)?;
            Ok(left + right)
        }
    };
    if evals.get() > EVALUATION_BUDGET {
        return Err(LoclabError::NoConvergence("adaptive quadrature evaluation budget"));
    }
    result
}

fn check(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(LoclabError::DivergentIntegral)
    }
}

/// A Simpson panel already split once, so its error estimate is known.
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fl: f64,
    fm: f64,
    fr: f64,
    fb: f64,
    depth: u32,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err.total_cmp(&o.err).is_eq()
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

impl Panel {
    #[allow(clippy::too_many_arguments)]
    fn new(a: f64, b: f64, fa: f64, fl: f64, fm: f64, fr: f64, fb: f64, depth: u32) -> Panel {
        let h = b - a;
        let whole = h / 6.0 * (fa + 4.0 * fm + fb);
        let left = h / 12.0 * (fa + 4.0 * fl + fm);
        let right = h / 12.0 * (fm + 4.0 * fr + fb);
        let delta = left + right - whole;
        let m = 0.5 * (a + b);
        // Panels at roundoff level or minimal width are final.
        let settled = depth >= MAX_DEPTH
            || m <= a
            || m >= b
            || delta.abs() <= 1e-15 * (left.abs() + right.abs());
        Panel {
            a,
            b,
            fa,
            fl,
            fm,
            fr,
            fb,
            depth,
            value: left + right + delta / 15.0,
            err: if settled { 0.0 } else { delta.abs() / 15.0 },
        }
    }
}

/// Globally adaptive Simpson: the panel with the largest error estimate is
/// bisected until the summed estimate falls to `rel_tol * |total|`.
fn finite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let h = (b - a) / INITIAL_PANELS as f64;
    let mut pts = Vec::with_capacity(4 * INITIAL_PANELS + 1);
    for i in 0..=4 * INITIAL_PANELS {
        let x = if i == 4 * INITIAL_PANELS { b } else { a + 0.25 * h * i as f64 };
        pts.push(check(f(x))?);
    }
    let mut heap = BinaryHeap::with_capacity(4 * INITIAL_PANELS);
    for p in 0..INITIAL_PANELS {
        let x0 = a + h * p as f64;
        let x1 = if p + 1 == INITIAL_PANELS { b } else { x0 + h };
        let q = &pts[4 * p..=4 * p + 4];
        heap.push(Panel::new(x0, x1, q[0], q[1], q[2], q[3], q[4], 0));
    }
    loop {
        let (mut total, mut err) = (0.0, 0.0);
        for p in heap.iter() {
            total += p.value;
            err += p.err;
        }
        let worst = heap.peek().map_or(0.0, |p| p.err);
        if worst == 0.0 || err <= rel_tol * total.abs() {
            // sum in position order for a reproducible result
            let mut panels: Vec<Panel> = heap.into_vec();
            panels.sort_by(|x, y| x.a.total_cmp(&y.a));
            let mut sum = 0.0;
            let mut comp = 0.0;
            for p in panels {
                let y = p.value - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
            return Ok(sum);
        }
        // Refine a batch of the worst panels before re-summing.
        for _ in 0..heap.len().clamp(1, 64) {
            let Some(p) = heap.pop() else { break };
            if p.err == 0.0 {
                heap.push(p);
                break;
            }
            let m = 0.5 * (p.a + p.b);
            let l1 = 0.5 * (p.a + 0.5 * (p.a + m));
            let l3 = 0.5 * (0.5 * (p.a + m) + m);
            let r1 = 0.5 * (m + 0.5 * (m + p.b));
            let r3 = 0.5 * (0.5 * (m + p.b) + p.b);
            let (fl1, fl3, fr1, fr3) = (check(f(l1))?, check(f(l3))?, check(f(r1))?, check(f(r3))?);
            heap.push(Panel::new(p.a, m, p.fa, fl1, p.fl, fl3, p.fm, p.depth + 1));
            heap.push(Panel::new(m, p.b, p.fm, fr1, p.fr, fr3, p.fb, p.depth + 1));
        }
    }
}

/// Integrates outward from `start` in direction `dir` (±1) in blocks of
/// doubling width until a block is negligible against the running peak.
fn half_line<F: Fn(f64) -> f64>(
    f: &F,
    start: f64,
    dir: f64,
    rel_tol: f64,
    peak: &Cell<f64>,
) -> Result<f64> {
    let cutoff = TRUNCATION_LOG_RATIO.exp();
    let mut total = 0.0;
    let mut x0 = start;
    let mut width = 1.0;
    for _ in 0..MAX_BLOCKS {
        let x1 = x0 + dir * width;
        let (lo, hi) = if dir > 0.0 { (x0, x1) } else { (x1, x0) };
        // Sample the block on its own to judge negligibility.
        let mut block_max = 0.0f64;
        for k in 0..=8 {
            let x = lo + (hi - lo) * k as f64 / 8.0;
            block_max = block_max.max(check(f(x))?.abs());
        }
        let v = finite(f, lo, hi, rel_tol)?;
        total += v;
        let p = peak.get();
        if p > 0.0 && block_max < cutoff * p {
            return Ok(total);
        }
        if !p.is_finite() {
            return Err(LoclabError::DivergentIntegral);
        }
        if p == 0.0 && width > 1e6 {
            return Ok(total);
        }
        x0 = x1;
        width *= 2.0;
    }
    Err(LoclabError::DivergentIntegral)
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared 16-point rule.
    pub fn sixteen() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    /// Shared 24-point rule.
    pub fn twenty_four() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(24))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        r * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(c + r * x))
            .sum::<f64>()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn uniform_density_integrates_to_one() {
        let s3 = 3f64.sqrt();
        let v = adaptive_quad(|_| 1.0 / (2.0 * s3), Support::Finite(-s3, s3), 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normal_second_moment_is_one() {
        let v = adaptive_quad(
            |x| x * x * (-0.5 * x * x).exp() / (2.0 * PI).sqrt(),
            Support::Whole(0.0),
            1e-12,
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_on_unit_interval() {
        let v = adaptive_quad(f64::exp, Support::Finite(0.0, 1.0), 1e-13).unwrap();
        assert!((v - 1.718_281_828_459_045).abs() < 1e-13 * 1.72);
    }

    #[test]
    fn growing_integrand_is_divergent() {
        let r = adaptive_quad(|x| (0.1 * x).exp(), Support::Above(0.0), 1e-10);
        assert!(matches!(r, Err(LoclabError::DivergentIntegral)));
    }

    #[test]
    fn rejects_tolerance_outside_range() {
        assert!(adaptive_quad(|x| x, Support::Finite(0.0, 1.0), 1e-3).is_err());
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [1, 2, 5, 16, 24] {
            let r = GaussLegendre::new(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn gauss_legendre_exact_for_high_degree_polynomials() {
        let r = GaussLegendre::sixteen();
        // ∫_0^2 x^31 dx = 2^32/32
        let v = r.integrate(|x| x.powi(31), 0.0, 2.0);
        let exact = 2f64.powi(32) / 32.0;
        assert!(((v - exact) / exact).abs() < 1e-13);
    }
}
