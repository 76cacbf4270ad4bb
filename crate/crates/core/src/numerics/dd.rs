//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`
//! with `|lo| <= ulp(hi) / 2`, giving roughly 106 bits of significand.
//!
//! Only the operations needed by [`crate::numerics::ExtReal`] are provided:
//! the four field operations, `exp`, `ln` and `ln_1p`. The algorithms follow
//! the classic QD library (Hida, Li, Bailey): error-free transformations for
//! the field operations, argument reduction plus Taylor series for `exp`, and
//! one Newton step on `exp` for `ln`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const LN2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.3190468138462996e-17,
    };
    pub const LN10: Dd = Dd {
        hi: std::f64::consts::LN_10,
        lo: -2.1707562233822494e-16,
    };

    #[inline]
    pub const fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.hi == 0.0
    }

    #[inline]
    pub fn signum(self) -> i8 {
        if self.hi > 0.0 {
            1
        } else if self.hi < 0.0 {
            -1
        } else {
            0
        }
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    /// Multiplication by a power of two, exact.
    #[inline]
    pub fn ldexp(self, k: i32) -> Dd {
        if k.abs() > 1000 {
            let half = k / 2;
            return self.ldexp(half).ldexp(k - half);
        }
        let s = 2f64.powi(k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, b);
        let p2 = p2 + self.lo * b;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    pub fn sqr(self) -> Dd {
        self * self
    }

    pub fn powi(self, n: u32) -> Dd {
        let mut base = self;
        let mut acc = Dd::ONE;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base.sqr();
            k >>= 1;
        }
        acc
    }

    pub fn exp(self) -> Dd {
        const K: i32 = 10;
        if self.hi > 709.78 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Dd::ZERO;
        }
        if self.is_zero() {
            return Dd::ONE;
        }
        let m = (self.hi / Self::LN2.hi).round();
        let r = (self - Self::LN2.mul_f64(m)).ldexp(-K);

        // expm1(r) by Taylor series; |r| <= ln2 / 2^(K+1).
        let mut term = r;
        let mut sum = r;
        let mut n = 2.0;
        loop {
            term = term * r / Dd::from_f64(n);
            sum = sum + term;
            if term.hi.abs() <= 1e-36 * sum.hi.abs() || n > 30.0 {
                break;
            }
            n += 1.0;
        }
        // (1 + s)^2 - 1 = 2s + s^2 keeps the small quantity explicit.
        for _ in 0..K {
            sum = sum.ldexp(1) + sum.sqr();
        }
        let y = sum + Dd::ONE;
        // Split the scaling so that exp near the overflow edge does not go
        // through an infinite intermediate.
        let m = m as i32;
        if m > 1000 {
            y.ldexp(1000).ldexp(m - 1000)
        } else if m < -1000 {
            y.ldexp(-1000).ldexp(m + 1000)
        } else {
            y.ldexp(m)
        }
    }

    /// Natural logarithm. Returns NaN for negative input, -inf for zero.
    pub fn ln(self) -> Dd {
        if self.hi < 0.0 {
            return Dd::from_f64(f64::NAN);
        }
        if self.is_zero() {
            return Dd::from_f64(f64::NEG_INFINITY);
        }
        if self.hi.is_infinite() {
            return self;
        }
        // Reduce to a mantissa near 1 so exp(-x0) stays normal.
        let k = self.hi.log2().round();
        let m = self.ldexp(-(k as i32));
        // x1 = x0 + m * exp(-x0) - 1
        let x0 = Dd::from_f64(m.hi.ln());
        Self::LN2.mul_f64(k) + (x0 + m * (-x0).exp() - Dd::ONE)
    }

    /// `ln(1 + x)` accurate for small `x`.
    pub fn ln_1p(self) -> Dd {
        if self.hi.abs() > 1e-3 {
            return (Dd::ONE + self).ln();
        }
        // atanh series: ln(1+x) = 2 atanh(x / (2 + x))
        let z = self / (Dd::from_f64(2.0) + self);
        let z2 = z.sqr();
        let mut term = z;
        let mut sum = z;
        let mut k = 3.0;
        while k < 60.0 {
            term = term * z2;
            let add = term / Dd::from_f64(k);
            sum = sum + add;
            if add.hi.abs() <= 1e-36 * sum.hi.abs() {
                break;
            }
            k += 2.0;
        }
        sum.ldexp(1)
    }

    pub fn total_cmp(&self, other: &Dd) -> Ordering {
        match self.hi.total_cmp(&other.hi) {
            Ordering::Equal => self.lo.total_cmp(&other.lo),
            o => o,
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::from_f64(x)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        if !self.hi.is_finite() || !b.hi.is_finite() {
            return Dd::from_f64(self.hi + b.hi);
        }
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        if !self.hi.is_finite() || !b.hi.is_finite() {
            return Dd::from_f64(self.hi * b.hi);
        }
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        if !self.hi.is_finite() || !b.hi.is_finite() || b.hi == 0.0 {
            return Dd::from_f64(self.hi / b.hi);
        }
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == 0.0 {
            write!(f, "{:e}", self.hi)
        } else {
            write!(f, "{:e}{:+e}", self.hi, self.lo)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: Dd, b: Dd) -> f64 {
        ((a - b).to_f64() / b.to_f64()).abs()
    }

    #[test]
    fn exp_one_matches_e_to_double_double_precision() {
        let e = Dd {
            hi: std::f64::consts::E,
            lo: 1.4456468917292502e-16,
        };
        assert!(rel(Dd::ONE.exp(), e) < 1e-30);
    }

    #[test]
    fn ln_inverts_exp() {
        for &x in &[-600.0, -62.5, -1.0, 1e-8, 0.5, 3.0, 62.5, 125.0, 690.0] {
            let d = Dd::from_f64(x);
            let back = d.exp().ln();
            assert!((back - d).to_f64().abs() <= 1e-30 * x.abs().max(1.0), "{x}");
        }
    }

    #[test]
    fn ln_of_ten_matches_constant() {
        assert!(rel(Dd::from_f64(10.0).ln(), Dd::LN10) < 1e-31);
    }

    #[test]
    fn exp_squares_consistently() {
        // exp(62.5)^2 and exp(125) agree far below f64 resolution
        let a = Dd::from_f64(62.5).exp().sqr();
        let b = Dd::from_f64(125.0).exp();
        assert!(rel(a, b) < 1e-29);
    }

    #[test]
    fn ln_1p_small_arguments() {
        // ln(1+x) = x - x^2/2 + O(x^3)
        let x = Dd::from_f64(1e-20);
        let series = x - x.sqr().ldexp(-1);
        assert!(rel(x.ln_1p(), series) < 1e-30);
        let y = Dd::from_f64(1e-4);
        let expect = (Dd::ONE + y).ln();
        assert!(rel(y.ln_1p(), expect) < 1e-28);
    }

    #[test]
    fn division_round_trips() {
        let a = Dd::from_f64(1.0) / Dd::from_f64(3.0);
        let back = a * Dd::from_f64(3.0);
        assert!((back - Dd::ONE).to_f64().abs() < 1e-31);
    }
}
