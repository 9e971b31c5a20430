//! Exact arithmetic in real quadratic fields: values `(a + b*sqrt(d)) / c`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::ball::Ball;
use crate::error::{Error, Result};

/// `(a + b*sqrt(d)) / c` in canonical form: `c > 0`, `gcd(a, b, c) = 1`,
/// `d` free of small square factors and not a perfect square. Rationals
/// carry `b = 0` and `d = 1` and combine with every field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadIrr {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

/// Square factors up to this bound are pulled out of the radicand.
const SQUAREFREE_TRIAL_LIMIT: u64 = 100_000;

fn extract_square(d: &BigInt) -> (BigInt, BigInt) {
    // d = f^2 * rest
    let mut rest = d.clone();
    let mut f = BigInt::one();
    let mut p: u64 = 2;
    while p <= SQUAREFREE_TRIAL_LIMIT {
        let pp = BigInt::from(p * p);
        if pp > rest {
            break;
        }
        while (&rest % &pp).is_zero() {
            rest /= &pp;
            f *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    (f, rest)
}

pub fn is_perfect_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}

impl QuadIrr {
    /// `(a + b*sqrt(d)) / c`.
    pub fn new(a: BigInt, b: BigInt, d: BigInt, c: BigInt) -> Result<Self> {
        if c.is_zero() {
            return Err(Error::input("quadratic denominator c must be nonzero"));
        }
        if !d.is_positive() {
            return Err(Error::input("quadratic radicand d must be positive"));
        }
        let (f, rest) = extract_square(&d);
        let mut b = b * f;
        let mut a = a;
        let mut d = rest;
        if is_perfect_square(&d) {
            a += &b * d.sqrt();
            b = BigInt::zero();
            d = BigInt::one();
        }
        Ok(QuadIrr::normalized(a, b, c, d))
    }

    fn normalized(mut a: BigInt, mut b: BigInt, mut c: BigInt, mut d: BigInt) -> Self {
        if b.is_zero() {
            d = BigInt::one();
        }
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        let g = a.gcd(&b).gcd(&c);
        if !g.is_zero() && !g.is_one() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        QuadIrr { a, b, c, d }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        QuadIrr::normalized(
            r.numer().clone(),
            BigInt::zero(),
            r.denom().clone(),
            BigInt::one(),
        )
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        QuadIrr::from_rational(&BigRational::from_integer(v.into()))
    }

    /// `sqrt(r)` for a nonnegative rational.
    pub fn sqrt_rational(r: &BigRational) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::input("square root of a negative rational"));
        }
        if r.is_zero() {
            return Ok(QuadIrr::from_int(0));
        }
        // sqrt(p/q) = sqrt(p q) / q
        let pq = r.numer() * r.denom();
        QuadIrr::new(BigInt::zero(), BigInt::one(), pq, r.denom().clone())
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }
    pub fn b(&self) -> &BigInt {
        &self.b
    }
    pub fn c(&self) -> &BigInt {
        &self.c
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.is_rational()
            .then(|| BigRational::new(self.a.clone(), self.c.clone()))
    }

    /// Both values over one radicand; `sqrt(d') = (s/d) sqrt(d)` when `d d' = s^2`.
    fn aligned(&self, other: &QuadIrr) -> Result<(QuadIrr, QuadIrr)> {
        if self.b.is_zero() || other.b.is_zero() || self.d == other.d {
            return Ok((self.clone(), other.clone()));
        }
        let prod = &self.d * &other.d;
        if !is_perfect_square(&prod) {
            return Err(Error::input(format!(
                "values live in different quadratic fields (sqrt {} vs sqrt {})",
                self.d, other.d
            )));
        }
        let s = prod.sqrt();
        let (small, large) = if self.d <= other.d { (self, other) } else { (other, self) };
        let moved = QuadIrr::normalized(
            &large.a * &small.d,
            &large.b * &s,
            &large.c * &small.d,
            small.d.clone(),
        );
        Ok(if self.d <= other.d {
            (self.clone(), moved)
        } else {
            (moved, other.clone())
        })
    }

    fn common_d(&self, other: &QuadIrr) -> BigInt {
        if self.b.is_zero() {
            other.d.clone()
        } else {
            self.d.clone()
        }
    }

    pub fn neg(&self) -> QuadIrr {
        QuadIrr {
            a: -&self.a,
            b: -&self.b,
            c: self.c.clone(),
            d: self.d.clone(),
        }
    }

    pub fn conjugate(&self) -> QuadIrr {
        QuadIrr {
            a: self.a.clone(),
            b: -&self.b,
            c: self.c.clone(),
            d: self.d.clone(),
        }
    }

    pub fn add(&self, other: &QuadIrr) -> Result<QuadIrr> {
        let (x, y) = self.aligned(other)?;
        let d = x.common_d(&y);
        let a = &x.a * &y.c + &y.a * &x.c;
        let b = &x.b * &y.c + &y.b * &x.c;
        let c = &x.c * &y.c;
        Ok(QuadIrr::normalized(a, b, c, d))
    }

    pub fn sub(&self, other: &QuadIrr) -> Result<QuadIrr> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &QuadIrr) -> Result<QuadIrr> {
        let (x, y) = self.aligned(other)?;
        let d = x.common_d(&y);
        let a = &x.a * &y.a + &x.b * &y.b * &d;
        let b = &x.a * &y.b + &x.b * &y.a;
        let c = &x.c * &y.c;
        Ok(QuadIrr::normalized(a, b, c, d))
    }

    pub fn recip(&self) -> Result<QuadIrr> {
        // c / (a + b r) = c (a - b r) / (a^2 - b^2 d)
        let norm = &self.a * &self.a - &self.b * &self.b * &self.d;
        if norm.is_zero() {
            return Err(Error::input("reciprocal of zero"));
        }
        Ok(QuadIrr::normalized(
            &self.c * &self.a,
            -(&self.c * &self.b),
            norm,
            self.d.clone(),
        ))
    }

    pub fn div(&self, other: &QuadIrr) -> Result<QuadIrr> {
        self.mul(&other.recip()?)
    }

    pub fn add_rational(&self, r: &BigRational) -> QuadIrr {
        self.add(&QuadIrr::from_rational(r))
            .expect("rationals combine with any field")
    }

    pub fn mul_rational(&self, r: &BigRational) -> QuadIrr {
        self.mul(&QuadIrr::from_rational(r))
            .expect("rationals combine with any field")
    }

    pub fn mul_int(&self, k: &BigInt) -> QuadIrr {
        QuadIrr::normalized(&self.a * k, &self.b * k, self.c.clone(), self.d.clone())
    }

    /// Exact sign of the value.
    pub fn signum(&self) -> i32 {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // opposite signs: compare a^2 against b^2 d (never equal for nonsquare d)
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * &self.d;
        if lhs > rhs {
            sa
        } else {
            sb
        }
    }

    pub fn floor(&self) -> BigInt {
        if self.b.is_zero() {
            return self.a.div_floor(&self.c);
        }
        let r = (&self.b * &self.b * &self.d).sqrt();
        // floor(b sqrt d); b sqrt d is irrational
        let t = if self.b.is_positive() { r } else { -r - 1 };
        (&self.a + t).div_floor(&self.c)
    }

    pub fn ceil(&self) -> BigInt {
        -(self.neg().floor())
    }

    pub fn to_ball(&self, prec: u64) -> Ball {
        let wp = prec + 8;
        if self.b.is_zero() {
            return Ball::from_rational(&BigRational::new(self.a.clone(), self.c.clone()), prec);
        }
        // a + b sqrt(d) = a + sign(b) sqrt(b^2 d)
        let radicand = &self.b * &self.b * &self.d;
        let extra = radicand.bits() / 2;
        let s = Ball::from_int(radicand)
            .sqrt(wp + extra)
            .expect("positive radicand");
        let s = if self.b.is_negative() { s.neg() } else { s };
        let num = s.add(&Ball::from_int(self.a.clone()), wp + extra);
        num.div(&Ball::from_int(self.c.clone()), prec)
            .expect("c > 0")
    }
}

fn sign_of(x: &BigInt) -> i32 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

impl PartialOrd for QuadIrr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let diff = self.sub(other).ok()?;
        Some(diff.signum().cmp(&0))
    }
}

/// `(a+b*sqrt(d))/c`, with `b` printed unsigned after the operator.
impl fmt::Display for QuadIrr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.b.is_negative() { '-' } else { '+' };
        write!(
            f,
            "({}{}{}*sqrt({}))/{}",
            self.a,
            op,
            self.b.abs(),
            self.d,
            self.c
        )
    }
}

impl serde::Serialize for QuadIrr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for QuadIrr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl FromStr for QuadIrr {
    type Err = Error;

    /// Accepts `(a+b*sqrt(d))/c`, `(a-b*sqrt(d))/c`, and omits `/c` as `/1`.
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::parse(format!("bad quadratic literal `{s}`, want (a+b*sqrt(d))/c"));
        let rest = s.strip_prefix('(').ok_or_else(bad)?;
        let close = rest.rfind(')').ok_or_else(bad)?;
        let (inner, tail) = rest.split_at(close);
        let tail = &tail[1..];
        let c: BigInt = if tail.is_empty() {
            BigInt::one()
        } else {
            tail.strip_prefix('/')
                .ok_or_else(bad)?
                .parse()
                .map_err(|_| bad())?
        };
        // split inner at the operator preceding the b*sqrt(d) term
        let star = inner.find("*sqrt(").ok_or_else(bad)?;
        let head = &inner[..star];
        let op_pos = head
            .char_indices()
            .skip(1)
            .filter(|(_, ch)| *ch == '+' || *ch == '-')
            .map(|(i, _)| i)
            .last()
            .ok_or_else(bad)?;
        let a: BigInt = head[..op_pos].parse().map_err(|_| bad())?;
        let b_abs: BigInt = head[op_pos + 1..].parse().map_err(|_| bad())?;
        let b = if &head[op_pos..op_pos + 1] == "-" {
            -b_abs
        } else {
            b_abs
        };
        let d_str = inner[star + "*sqrt(".len()..]
            .strip_suffix(')')
            .ok_or_else(bad)?;
        let d: BigInt = d_str.parse().map_err(|_| bad())?;
        QuadIrr::new(a, b, d, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> QuadIrr {
        s.parse().unwrap()
    }

    #[test]
    fn radicands_differing_by_a_square_combine() {
        // 1000003 is prime, past the trial-division bound
        let big = BigInt::from(1_000_003u64).pow(2) * 7;
        let x = QuadIrr::new(0.into(), 1.into(), big, 1.into()).unwrap();
        let y = q("(0+1*sqrt(7))/1");
        assert_eq!(x.sub(&y.mul_int(&BigInt::from(1_000_003u64))).unwrap(), QuadIrr::from_int(0));
        assert!(y.add(&q("(0+1*sqrt(11))/1")).is_err());
    }

    #[test]
    fn canonical_form() {
        // (2 + 2 sqrt 8)/4 = (1 + 2 sqrt 2)/2
        let x = QuadIrr::new(2.into(), 2.into(), 8.into(), 4.into()).unwrap();
        assert_eq!(x, q("(1+2*sqrt(2))/2"));
        // perfect square radicand collapses to a rational
        let y = QuadIrr::new(1.into(), 1.into(), 9.into(), 2.into()).unwrap();
        assert!(y.is_rational());
        assert_eq!(y.as_rational().unwrap(), BigRational::from_integer(2.into()));
    }

    #[test]
    fn floor_exact() {
        assert_eq!(q("(0+1*sqrt(2))/1").floor(), BigInt::from(1));
        assert_eq!(q("(0-1*sqrt(2))/1").floor(), BigInt::from(-2));
        assert_eq!(q("(1+1*sqrt(5))/2").floor(), BigInt::from(1));
        assert_eq!(q("(-7+1*sqrt(50))/1").floor(), BigInt::from(0));
    }

    #[test]
    fn recip_of_root2_minus_one() {
        let x = q("(-1+1*sqrt(2))/1").recip().unwrap();
        assert_eq!(x, q("(1+1*sqrt(2))/1"));
        assert_eq!(x.floor(), BigInt::from(2));
    }

    #[test]
    fn signum_opposite_parts() {
        assert_eq!(q("(3-2*sqrt(2))/1").signum(), 1);
        assert_eq!(q("(-3+2*sqrt(2))/1").signum(), -1);
        assert_eq!(q("(2-2*sqrt(2))/1").signum(), -1);
    }

    #[test]
    fn ball_encloses() {
        let x = q("(1+1*sqrt(5))/2");
        let b = x.to_ball(100);
        // phi^2 = phi + 1
        let sq = b.mul(&b, 100);
        let p1 = b.add(&Ball::one(), 100);
        assert!(sq.overlaps(&p1));
        assert!(b.width_within(95));
    }

    #[test]
    fn display_parse_round_trip() {
        for s in ["(0+1*sqrt(2))/1", "(-3-4*sqrt(7))/5", "(4+0*sqrt(1))/3"] {
            let x = q(s);
            assert_eq!(q(&x.to_string()), x);
        }
    }

    #[test]
    fn field_mismatch_is_an_error() {
        assert!(q("(0+1*sqrt(2))/1").add(&q("(0+1*sqrt(3))/1")).is_err());
    }
}
