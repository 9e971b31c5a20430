//! Closed intervals with dyadic endpoints.
//!
//! Every operation rounds its endpoints outward to the requested number of
//! significant bits, so the result always encloses the exact image of the
//! inputs.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::dyadic::Dyadic;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ball {
    lo: Dyadic,
    hi: Dyadic,
}

impl Ball {
    /// Panics if `lo > hi`.
    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        assert!(lo <= hi, "ball endpoints out of order: {lo} > {hi}");
        Ball { lo, hi }
    }

    pub fn exact(d: Dyadic) -> Self {
        Ball {
            lo: d.clone(),
            hi: d,
        }
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        Ball::exact(Dyadic::from_int(v))
    }

    pub fn zero() -> Self {
        Ball::exact(Dyadic::zero())
    }

    pub fn one() -> Self {
        Ball::exact(Dyadic::one())
    }

    pub fn from_rational(r: &BigRational, prec: u64) -> Self {
        Ball {
            lo: Dyadic::from_rational_round(r, prec, false),
            hi: Dyadic::from_rational_round(r, prec, true),
        }
    }

    /// The symmetric ball `[-r, r]`.
    pub fn symmetric(r: Dyadic) -> Self {
        let r = r.abs();
        Ball { lo: r.neg(), hi: r }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    /// `true` when the width does not exceed `2^-p`.
    pub fn width_within(&self, p: i64) -> bool {
        let w = self.width();
        w.is_zero() || w <= Dyadic::one().shl(-p)
    }

    pub fn mid(&self) -> Dyadic {
        self.lo.add(&self.hi).shl(-1)
    }

    pub fn mag_upper(&self) -> Dyadic {
        let a = self.lo.abs();
        let b = self.hi.abs();
        if a > b {
            a
        } else {
            b
        }
    }

    pub fn contains(&self, d: &Dyadic) -> bool {
        &self.lo <= d && d <= &self.hi
    }

    pub fn contains_rational(&self, r: &BigRational) -> bool {
        &self.lo.to_rational() <= r && r <= &self.hi.to_rational()
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.signum() <= 0 && self.hi.signum() >= 0
    }

    pub fn subset_of(&self, other: &Ball) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn overlaps(&self, other: &Ball) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersect(&self, other: &Ball) -> Option<Ball> {
        let lo = if self.lo > other.lo {
            self.lo.clone()
        } else {
            other.lo.clone()
        };
        let hi = if self.hi < other.hi {
            self.hi.clone()
        } else {
            other.hi.clone()
        };
        (lo <= hi).then_some(Ball { lo, hi })
    }

    /// Smallest ball containing both.
    pub fn hull(&self, other: &Ball) -> Ball {
        let lo = if self.lo < other.lo {
            self.lo.clone()
        } else {
            other.lo.clone()
        };
        let hi = if self.hi > other.hi {
            self.hi.clone()
        } else {
            other.hi.clone()
        };
        Ball { lo, hi }
    }

    /// Every point of `self` is strictly below every point of `other`.
    pub fn lt(&self, other: &Ball) -> bool {
        self.hi < other.lo
    }

    pub fn gt(&self, other: &Ball) -> bool {
        other.lt(self)
    }

    pub fn is_positive(&self) -> bool {
        self.lo.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.hi.signum() < 0
    }

    /// Widens by `r` on both sides.
    pub fn inflate(&self, r: &Dyadic) -> Ball {
        let r = r.abs();
        Ball {
            lo: self.lo.sub(&r),
            hi: self.hi.add(&r),
        }
    }

    pub fn neg(&self) -> Ball {
        Ball {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
        }
    }

    pub fn round(&self, prec: u64) -> Ball {
        Ball {
            lo: self.lo.round_down(prec),
            hi: self.hi.round_up(prec),
        }
    }

    pub fn add(&self, other: &Ball, prec: u64) -> Ball {
        Ball {
            lo: self.lo.add(&other.lo).round_down(prec),
            hi: self.hi.add(&other.hi).round_up(prec),
        }
    }

    pub fn sub(&self, other: &Ball, prec: u64) -> Ball {
        Ball {
            lo: self.lo.sub(&other.hi).round_down(prec),
            hi: self.hi.sub(&other.lo).round_up(prec),
        }
    }

    pub fn add_exact(&self, other: &Ball) -> Ball {
        Ball {
            lo: self.lo.add(&other.lo),
            hi: self.hi.add(&other.hi),
        }
    }

    pub fn sub_exact(&self, other: &Ball) -> Ball {
        Ball {
            lo: self.lo.sub(&other.hi),
            hi: self.hi.sub(&other.lo),
        }
    }

    pub fn mul(&self, other: &Ball, prec: u64) -> Ball {
        if self.lo.signum() >= 0 && other.lo.signum() >= 0 {
            return Ball {
                lo: self.lo.mul(&other.lo).round_down(prec),
                hi: self.hi.mul(&other.hi).round_up(prec),
            };
        }
        let c = [
            self.lo.mul(&other.lo),
            self.lo.mul(&other.hi),
            self.hi.mul(&other.lo),
            self.hi.mul(&other.hi),
        ];
        let lo = c.iter().min().expect("nonempty").round_down(prec);
        let hi = c.iter().max().expect("nonempty").round_up(prec);
        Ball { lo, hi }
    }

    pub fn mul_int(&self, k: &BigInt, prec: u64) -> Ball {
        let kd = Dyadic::from_int(k.clone());
        self.mul(&Ball::exact(kd), prec)
    }

    pub fn mul_rational(&self, r: &BigRational, prec: u64) -> Ball {
        let num = self.mul_int(r.numer(), prec + 4);
        num.div(&Ball::from_int(r.denom().clone()), prec)
            .expect("rational denominators are nonzero")
    }

    pub fn square(&self, prec: u64) -> Ball {
        if self.lo.signum() >= 0 {
            self.mul(self, prec)
        } else if self.hi.signum() <= 0 {
            self.neg().mul(&self.neg(), prec)
        } else {
            let m = self.mag_upper();
            Ball {
                lo: Dyadic::zero(),
                hi: m.mul(&m).round_up(prec),
            }
        }
    }

    /// Multiplies by `2^k` exactly.
    pub fn shl(&self, k: i64) -> Ball {
        Ball {
            lo: self.lo.shl(k),
            hi: self.hi.shl(k),
        }
    }

    /// `None` when the ball contains zero.
    pub fn recip(&self, prec: u64) -> Option<Ball> {
        if self.contains_zero() {
            return None;
        }
        let one = Dyadic::one();
        Some(Ball {
            lo: Dyadic::div_round(&one, &self.hi, prec, false),
            hi: Dyadic::div_round(&one, &self.lo, prec, true),
        })
    }

    /// `None` when the divisor contains zero.
    pub fn div(&self, other: &Ball, prec: u64) -> Option<Ball> {
        if other.contains_zero() {
            return None;
        }
        if other.is_exact() {
            let d = &other.lo;
            let (a, b) = if d.signum() > 0 {
                (&self.lo, &self.hi)
            } else {
                (&self.hi, &self.lo)
            };
            return Some(Ball {
                lo: Dyadic::div_round(a, d, prec, false),
                hi: Dyadic::div_round(b, d, prec, true),
            });
        }
        let r = other.recip(prec + 8)?;
        Some(self.mul(&r, prec))
    }

    /// Square root; negative parts are clipped to zero. `None` if the whole
    /// ball is negative.
    pub fn sqrt(&self, prec: u64) -> Option<Ball> {
        if self.hi.signum() < 0 {
            return None;
        }
        let lo = if self.lo.signum() <= 0 {
            Dyadic::zero()
        } else {
            sqrt_round(&self.lo, prec, false)
        };
        let hi = sqrt_round(&self.hi, prec, true);
        Some(Ball { lo, hi })
    }

    /// Floor when the ball sits strictly inside `(v, v+1)`, or `v` exactly
    /// for an exact integer ball.
    pub fn floor_strict(&self) -> Option<BigInt> {
        let f = self.lo.floor();
        if self.is_exact() {
            return Some(f);
        }
        let f_hi = self.hi.floor();
        if f != f_hi {
            return None;
        }
        // lo must not be the integer itself: the value could sit on it
        if self.lo.is_integer() {
            return None;
        }
        Some(f)
    }

    /// The certified fractional part `x - floor(x)` when the floor is decided.
    pub fn frac(&self) -> Option<(BigInt, Ball)> {
        let f = self.floor_strict()?;
        let fd = Dyadic::from_int(f.clone());
        Some((
            f,
            Ball {
                lo: self.lo.sub(&fd),
                hi: self.hi.sub(&fd),
            },
        ))
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64()
    }

    /// Midpoint with `digits` significant digits and a `±` radius.
    pub fn display_sig(&self, digits: usize) -> String {
        let rad = self.width().shl(-1);
        format!(
            "{} ± {}",
            self.mid().to_sci_string(digits),
            rad.to_sci_string(2)
        )
    }
}

fn sqrt_round(x: &Dyadic, prec: u64, up: bool) -> Dyadic {
    if x.is_zero() {
        return Dyadic::zero();
    }
    let m = x.mantissa();
    let e = x.exponent();
    // shift so the exponent is even and the mantissa carries >= 2*prec bits
    let mut shift = (2 * prec as i64 + 4 - m.bits() as i64).max(0);
    if (e - shift) % 2 != 0 {
        shift += 1;
    }
    let mm: BigInt = m << shift as u64;
    let r = mm.sqrt();
    let exact = &r * &r == mm;
    let r = if up && !exact { r + BigInt::one() } else { r };
    let out = Dyadic::new(r, (e - shift) / 2);
    if up {
        out.round_up(prec)
    } else {
        out.round_down(prec)
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(lo: i64, hi: i64) -> Ball {
        Ball::new(Dyadic::from_int(lo), Dyadic::from_int(hi))
    }

    #[test]
    fn mul_signs() {
        let a = ball(-2, 3);
        let b = ball(-5, 1);
        let p = a.mul(&b, 64);
        assert_eq!(p, ball(-15, 10));
    }

    #[test]
    fn recip_rejects_zero() {
        assert!(ball(-1, 1).recip(64).is_none());
        let r = ball(2, 4).recip(64).unwrap();
        assert!(r.contains(&Dyadic::new(1.into(), -2)));
        assert!(r.contains(&Dyadic::new(1.into(), -1)));
    }

    #[test]
    fn sqrt_two_enclosure() {
        let s = Ball::from_int(2).sqrt(80).unwrap();
        let lo2 = s.lo().mul(s.lo());
        let hi2 = s.hi().mul(s.hi());
        assert!(lo2 <= Dyadic::from_int(2) && Dyadic::from_int(2) <= hi2);
        assert!(s.width_within(78));
    }

    #[test]
    fn floor_strict_needs_interior() {
        assert_eq!(ball(3, 3).floor_strict(), Some(BigInt::from(3)));
        assert_eq!(ball(3, 4).floor_strict(), None);
        let b = Ball::new(Dyadic::new(5.into(), -2), Dyadic::new(7.into(), -2));
        assert_eq!(b.floor_strict(), Some(BigInt::from(1)));
        let c = Ball::new(Dyadic::from_int(1), Dyadic::new(3.into(), -1));
        assert_eq!(c.floor_strict(), None);
    }

    #[test]
    fn serde_exact() {
        let b = Ball::new(Dyadic::new((-7).into(), -3), Dyadic::new(9.into(), 2));
        let s = serde_json::to_string(&b).unwrap();
        assert_eq!(s, r#"{"lo":"-7*2^-3","hi":"9*2^2"}"#);
        let back: Ball = serde_json::from_str(&s).unwrap();
        assert_eq!(back, b);
    }
}
