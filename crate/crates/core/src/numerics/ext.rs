//! Extended-range reals kept on the natural-log scale.
//!
//! An [`ExtReal`] is `sign * exp(L)`, where the log-magnitude `L` is a
//! [`LogMag`]: either a double-double (`|L| <= 1e300`) or, once that
//! overflows, a second "tower" tier storing `L = s * exp(ll)`. Values whose
//! `ll` itself would exceed `1e300` saturate to `ll = +inf` ("beyond the
//! tiers"); such values still compare correctly against every representable
//! value but carry no further digits.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::dd::Dd;

/// Largest `|L|` kept in the plain tier.
pub const PLAIN_LIMIT: f64 = 1e300;
/// `ln(PLAIN_LIMIT)`: tower entries always have `ll` above this.
const LN_PLAIN_LIMIT: f64 = 690.775_527_898_213_7;
/// Below `exp(-80)` a summand is invisible at double-double precision.
const LSE_CUTOFF: f64 = -80.0;

/// A signed real in two tiers: plain, or `sign * exp(ll)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LogMag {
    Plain(Dd),
    Tower { sign: i8, ll: Dd },
}

fn signed_lse(a: (i8, Dd), b: (i8, Dd)) -> (i8, Dd) {
    if a.0 == 0 {
        return b;
    }
    if b.0 == 0 {
        return a;
    }
    let (big, small) = if a.1.total_cmp(&b.1) == Ordering::Less {
        (b, a)
    } else {
        (a, b)
    };
    if big.1.hi == f64::INFINITY {
        return big;
    }
    let d = small.1 - big.1;
    if d.hi < LSE_CUTOFF {
        return big;
    }
    let e = d.exp();
    if big.0 == small.0 {
        (big.0, big.1 + e.ln_1p())
    } else if d.is_zero() {
        (0, Dd::from_f64(f64::NEG_INFINITY))
    } else {
        (big.0, big.1 + (-e).ln_1p())
    }
}

impl LogMag {
    pub const ZERO: LogMag = LogMag::Plain(Dd::ZERO);

    /// Canonical form of a plain value.
    pub fn from_dd(v: Dd) -> LogMag {
        if v.hi.is_nan() {
            panic!("NaN in LogMag");
        }
        if v.hi.abs() <= PLAIN_LIMIT {
            LogMag::Plain(v)
        } else if v.hi.is_infinite() {
            LogMag::Tower {
                sign: v.signum(),
                ll: Dd::from_f64(f64::INFINITY),
            }
        } else {
            LogMag::Tower {
                sign: v.signum(),
                ll: v.abs().ln(),
            }
        }
    }

    /// The value `sign * exp(ll)` in canonical form.
    pub fn from_sign_log(sign: i8, ll: Dd) -> LogMag {
        if sign == 0 || ll.hi == f64::NEG_INFINITY {
            return LogMag::ZERO;
        }
        if ll.hi <= LN_PLAIN_LIMIT {
            let m = ll.exp();
            LogMag::Plain(if sign < 0 { -m } else { m })
        } else if ll.hi > PLAIN_LIMIT {
            LogMag::Tower {
                sign,
                ll: Dd::from_f64(f64::INFINITY),
            }
        } else {
            LogMag::Tower { sign, ll }
        }
    }

    /// `(sign, ln|value|)`.
    pub fn sign_log(&self) -> (i8, Dd) {
        match *self {
            LogMag::Plain(v) => {
                if v.is_zero() {
                    (0, Dd::from_f64(f64::NEG_INFINITY))
                } else {
                    (v.signum(), v.abs().ln())
                }
            }
            LogMag::Tower { sign, ll } => (sign, ll),
        }
    }

    pub fn signum(&self) -> i8 {
        match *self {
            LogMag::Plain(v) => v.signum(),
            LogMag::Tower { sign, .. } => sign,
        }
    }

    pub fn is_tower(&self) -> bool {
        matches!(self, LogMag::Tower { .. })
    }

    pub fn is_beyond(&self) -> bool {
        matches!(self, LogMag::Tower { ll, .. } if ll.hi == f64::INFINITY)
    }

    pub fn add(&self, other: &LogMag) -> LogMag {
        match (self, other) {
            (LogMag::Plain(a), LogMag::Plain(b)) => LogMag::from_dd(*a + *b),
            _ => {
                let (s, l) = signed_lse(self.sign_log(), other.sign_log());
                LogMag::from_sign_log(s, l)
            }
        }
    }

    pub fn neg(&self) -> LogMag {
        match *self {
            LogMag::Plain(v) => LogMag::Plain(-v),
            LogMag::Tower { sign, ll } => LogMag::Tower { sign: -sign, ll },
        }
    }

    pub fn sub(&self, other: &LogMag) -> LogMag {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: Dd) -> LogMag {
        match *self {
            LogMag::Plain(v) => LogMag::from_dd(v * k),
            LogMag::Tower { sign, ll } => {
                if k.is_zero() {
                    return LogMag::ZERO;
                }
                LogMag::from_sign_log(sign * k.signum(), ll + k.abs().ln())
            }
        }
    }

    /// Nearest `f64`, saturating to `±inf` in the tower tier.
    pub fn to_f64(&self) -> f64 {
        match *self {
            LogMag::Plain(v) => v.to_f64(),
            LogMag::Tower { sign, .. } => f64::from(sign) * f64::INFINITY,
        }
    }

    pub fn total_cmp(&self, other: &LogMag) -> Ordering {
        match (self, other) {
            (LogMag::Plain(a), LogMag::Plain(b)) => a.total_cmp(b),
            (LogMag::Plain(_), LogMag::Tower { sign, .. }) => {
                if *sign > 0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            (LogMag::Tower { .. }, LogMag::Plain(_)) => other.total_cmp(self).reverse(),
            (LogMag::Tower { sign: sa, ll: la }, LogMag::Tower { sign: sb, ll: lb }) => {
                match sa.cmp(sb) {
                    Ordering::Equal if *sa > 0 => la.total_cmp(lb),
                    Ordering::Equal => lb.total_cmp(la),
                    o => o,
                }
            }
        }
    }
}

/// Extended-range real `sign * exp(log)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtReal {
    sign: i8,
    log: LogMag,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal {
        sign: 0,
        log: LogMag::ZERO,
    };
    pub const ONE: ExtReal = ExtReal {
        sign: 1,
        log: LogMag::ZERO,
    };

    pub fn from_parts(sign: i8, log: LogMag) -> ExtReal {
        if sign == 0 {
            ExtReal::ZERO
        } else {
            ExtReal {
                sign: sign.signum(),
                log,
            }
        }
    }

    pub fn from_f64(x: f64) -> ExtReal {
        ExtReal::from_dd(Dd::from_f64(x))
    }

    pub fn from_dd(x: Dd) -> ExtReal {
        assert!(!x.hi.is_nan(), "NaN has no ExtReal representation");
        if x.is_zero() {
            return ExtReal::ZERO;
        }
        if x.hi.is_infinite() {
            return ExtReal {
                sign: x.signum(),
                log: LogMag::Tower {
                    sign: 1,
                    ll: Dd::from_f64(f64::INFINITY),
                },
            };
        }
        ExtReal {
            sign: x.signum(),
            log: LogMag::Plain(x.abs().ln()),
        }
    }

    /// The positive number `exp(l)`.
    pub fn from_ln(l: f64) -> ExtReal {
        ExtReal::from_ln_dd(Dd::from_f64(l))
    }

    pub fn from_ln_dd(l: Dd) -> ExtReal {
        if l.hi == f64::NEG_INFINITY {
            return ExtReal::ZERO;
        }
        ExtReal {
            sign: 1,
            log: LogMag::from_dd(l),
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn log_mag(&self) -> LogMag {
        self.log
    }

    /// `ln|x|` as an `f64` (saturating; `-inf` for zero).
    pub fn ln_abs_f64(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.log.to_f64()
        }
    }

    /// `log10|x|` as an `f64` (saturating).
    pub fn log10_abs_f64(&self) -> f64 {
        self.ln_abs_f64() / std::f64::consts::LN_10
    }

    /// True when the magnitude lies beyond both tiers (effectively 0 or inf).
    pub fn is_beyond(&self) -> bool {
        self.sign != 0 && self.log.is_beyond()
    }

    pub fn neg(&self) -> ExtReal {
        ExtReal {
            sign: -self.sign,
            log: self.log,
        }
    }

    pub fn abs(&self) -> ExtReal {
        ExtReal {
            sign: self.sign.abs(),
            log: self.log,
        }
    }

    pub fn mul(&self, o: &ExtReal) -> ExtReal {
        if self.is_zero() || o.is_zero() {
            return ExtReal::ZERO;
        }
        ExtReal {
            sign: self.sign * o.sign,
            log: self.log.add(&o.log),
        }
    }

    pub fn div(&self, o: &ExtReal) -> ExtReal {
        assert!(!o.is_zero(), "ExtReal division by zero");
        if self.is_zero() {
            return ExtReal::ZERO;
        }
        ExtReal {
            sign: self.sign * o.sign,
            log: self.log.sub(&o.log),
        }
    }

    pub fn add(&self, o: &ExtReal) -> ExtReal {
        if self.is_zero() {
            return *o;
        }
        if o.is_zero() {
            return *self;
        }
        let (big, small) = if self.log.total_cmp(&o.log) == Ordering::Less {
            (o, self)
        } else {
            (self, o)
        };
        let d = small.log.sub(&big.log);
        let d = match d {
            LogMag::Plain(v) if v.hi >= LSE_CUTOFF => v,
            _ => return *big,
        };
        let e = d.exp();
        if big.sign == small.sign {
            ExtReal {
                sign: big.sign,
                log: big.log.add(&LogMag::Plain(e.ln_1p())),
            }
        } else if d.is_zero() {
            ExtReal::ZERO
        } else {
            ExtReal {
                sign: big.sign,
                log: big.log.add(&LogMag::Plain((-e).ln_1p())),
            }
        }
    }

    pub fn sub(&self, o: &ExtReal) -> ExtReal {
        self.add(&o.neg())
    }

    pub fn mul_f64(&self, k: f64) -> ExtReal {
        self.mul(&ExtReal::from_f64(k))
    }

    /// `|x|^a * sign(x)` for integer `a`, `x^a` for positive `x`.
    pub fn powf(&self, a: f64) -> ExtReal {
        if self.is_zero() {
            return if a > 0.0 {
                ExtReal::ZERO
            } else {
                panic!("zero to a non-positive power")
            };
        }
        let sign = if self.sign > 0 {
            1
        } else {
            assert!(a.fract() == 0.0, "negative base needs an integer exponent");
            if (a as i64) % 2 == 0 {
                1
            } else {
                -1
            }
        };
        ExtReal {
            sign,
            log: self.log.scale(Dd::from_f64(a)),
        }
    }

    /// `exp(x)`; saturates to the beyond-tier marker when `x` is in the
    /// tower tier.
    pub fn exp(&self) -> ExtReal {
        if self.is_zero() {
            return ExtReal::ONE;
        }
        let log = match self.log {
            LogMag::Plain(l) => LogMag::from_sign_log(self.sign, l),
            LogMag::Tower { .. } => LogMag::Tower {
                sign: self.sign,
                ll: Dd::from_f64(f64::INFINITY),
            },
        };
        ExtReal { sign: 1, log }
    }

    /// Natural log of a positive value.
    pub fn ln(&self) -> ExtReal {
        assert!(self.sign > 0, "ln of non-positive ExtReal");
        match self.log {
            LogMag::Plain(v) => ExtReal::from_dd(v),
            LogMag::Tower { sign, ll } => ExtReal {
                sign,
                log: LogMag::from_dd(ll),
            },
        }
    }

    /// Nearest `f64`, saturating to 0 or `±inf`.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let m = match self.log {
            LogMag::Plain(l) if l.hi < 710.0 => l.exp().to_f64(),
            LogMag::Plain(_) => f64::INFINITY,
            LogMag::Tower { sign, .. } => {
                if sign > 0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        };
        f64::from(self.sign) * m
    }

    pub fn total_cmp(&self, o: &ExtReal) -> Ordering {
        match self.sign.cmp(&o.sign) {
            Ordering::Equal => match self.sign {
                0 => Ordering::Equal,
                1 => self.log.total_cmp(&o.log),
                _ => o.log.total_cmp(&self.log),
            },
            ord => ord,
        }
    }

    pub fn max(self, o: ExtReal) -> ExtReal {
        if self.total_cmp(&o) == Ordering::Less {
            o
        } else {
            self
        }
    }

    /// Relative distance of the log-magnitudes, `|L_a - L_b| / max(1, |L_b|)`,
    /// evaluated in the tier both share. Used for "exact in log space" checks.
    pub fn log_rel_diff(&self, o: &ExtReal) -> f64 {
        if self.sign != o.sign {
            return f64::INFINITY;
        }
        if self.sign == 0 {
            return 0.0;
        }
        match (self.log, o.log) {
            (LogMag::Plain(a), LogMag::Plain(b)) => {
                (a - b).to_f64().abs() / b.to_f64().abs().max(1.0)
            }
            (LogMag::Tower { sign: sa, ll: la }, LogMag::Tower { sign: sb, ll: lb })
                if sa == sb =>
            {
                if la.hi.is_infinite() && lb.hi.is_infinite() {
                    0.0
                } else {
                    (la - lb).to_f64().abs() / lb.to_f64().abs().max(1.0)
                }
            }
            _ => f64::INFINITY,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            0 => return write!(f, "0"),
            1 => "",
            _ => "-",
        };
        match self.log {
            LogMag::Plain(l) => write!(f, "{s}e^({})", l.to_f64()),
            LogMag::Tower { sign, ll } => {
                let inner = if sign < 0 { "-" } else { "" };
                if ll.hi.is_infinite() {
                    write!(f, "{s}e^({inner}e^(>1e300))")
                } else {
                    write!(f, "{s}e^({inner}e^({}))", ll.to_f64())
                }
            }
        }
    }
}

/// Wire form: `{"sign": s, "ln_abs": L}` in the plain tier, or
/// `{"sign": s, "ln_sign": t, "ln_ln_abs": ll}` in the tower tier
/// (`ln_ln_abs` is `null` beyond the tiers). `lo` carries the low word of
/// the double-double logarithm when it is nonzero.
#[derive(Serialize, Deserialize)]
struct ExtRealWire {
    sign: i8,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    ln_abs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    ln_sign: Option<i8>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    ln_ln_abs: Option<f64>,
}

impl Serialize for ExtReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let wire = match (self.sign, self.log) {
            (0, _) => ExtRealWire {
                sign: 0,
                lo: None,
                ln_abs: None,
                ln_sign: None,
                ln_ln_abs: None,
            },
            (sign, LogMag::Plain(l)) => ExtRealWire {
                sign,
                lo: (l.lo != 0.0).then_some(l.lo),
                ln_abs: Some(l.hi),
                ln_sign: None,
                ln_ln_abs: None,
            },
            (sign, LogMag::Tower { sign: ls, ll }) => ExtRealWire {
                sign,
                lo: (ll.hi.is_finite() && ll.lo != 0.0).then_some(ll.lo),
                ln_abs: None,
                ln_sign: Some(ls),
                ln_ln_abs: ll.hi.is_finite().then_some(ll.hi),
            },
        };
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = ExtRealWire::deserialize(d)?;
        if w.sign == 0 {
            return Ok(ExtReal::ZERO);
        }
        let lo = w.lo.unwrap_or(0.0);
        let log = match (w.ln_abs, w.ln_sign) {
            (Some(l), _) => LogMag::from_dd(Dd::from_f64(l) + Dd::from_f64(lo)),
            (None, Some(ls)) => LogMag::Tower {
                sign: ls,
                ll: match w.ln_ln_abs {
                    Some(ll) => Dd::from_f64(ll) + Dd::from_f64(lo),
                    None => Dd::from_f64(f64::INFINITY),
                },
            },
            _ => return Err(serde::de::Error::custom("ExtReal needs ln_abs or ln_sign")),
        };
        Ok(ExtReal::from_parts(w.sign, log))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_tiny_values_adds_logs() {
        let a = ExtReal::from_ln(-1000.0);
        let p = a.mul(&a);
        assert_eq!(p, ExtReal::from_ln(-2000.0));
    }

    #[test]
    fn sum_of_equal_values_adds_ln2() {
        let a = ExtReal::from_ln(-5.0);
        let s = a.add(&a);
        let expect = -5.0 + std::f64::consts::LN_2;
        assert!((s.ln_abs_f64() - expect).abs() < 1e-15);
    }

    #[test]
    fn ladder_step_in_log_space() {
        // ln t2 = -(t1)^(-1/16) with t1 = e^-1000: |ln t2| = e^62.5
        let t1 = ExtReal::from_ln(-1000.0);
        let ln_t2 = t1.powf(-1.0 / 16.0).neg();
        assert_eq!(ln_t2.sign(), -1);
        assert_eq!(ln_t2.log_mag(), LogMag::Plain(Dd::from_f64(62.5)));
    }

    #[test]
    fn exp_enters_tower_tier() {
        let x = ExtReal::from_ln(62.5).neg(); // -e^62.5
        let t = x.exp(); // e^{-e^62.5}: ln = -1.4e27, still plain
        assert!(!t.log_mag().is_tower());
        let big = ExtReal::from_ln(900.0); // e^900 > 1e300
        let e = big.exp();
        assert!(e.log_mag().is_tower());
        assert!(e.exp().is_beyond());
        assert!(e.exp() > e);
    }

    #[test]
    fn cancellation_gives_zero() {
        let a = ExtReal::from_f64(3.5);
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn ordering_across_tiers() {
        let tiny_tower = ExtReal::from_ln(900.0).neg().exp(); // e^{-e^900}
        let tiny_plain = ExtReal::from_ln(-1e200);
        let beyond = ExtReal::from_ln(900.0).exp().neg().exp(); // e^{-e^{e^900}}
        assert!(ExtReal::ZERO < beyond);
        assert!(beyond < tiny_tower);
        assert!(tiny_tower < tiny_plain);
        assert!(tiny_plain < ExtReal::ONE);
        assert!(tiny_plain.neg() < ExtReal::ZERO);
        assert!(tiny_tower.neg() > tiny_plain.neg());
    }

    #[test]
    fn ln_round_trips_exp() {
        for &v in &[-1e250, -3.0, 0.5, 700.0, 1e120] {
            let x = ExtReal::from_f64(v);
            let back = x.exp().ln();
            assert!(back.log_rel_diff(&x) < 1e-28, "{v}");
        }
    }

    #[test]
    fn serde_round_trip() {
        for x in [
            ExtReal::ZERO,
            ExtReal::from_f64(-2.5),
            ExtReal::from_ln(900.0).exp(),
            ExtReal::from_ln(900.0).exp().exp(),
        ] {
            let s = serde_json::to_string(&x).unwrap();
            let y: ExtReal = serde_json::from_str(&s).unwrap();
            assert_eq!(x.total_cmp(&y), Ordering::Equal, "{s}");
        }
    }
}
