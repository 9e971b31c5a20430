//! Dyadic rationals `mantissa * 2^exponent` with directed rounding.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// An exact dyadic rational. The mantissa is odd unless the value is zero,
/// in which case the exponent is zero too, so equal values compare equal
/// structurally.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            mant: BigInt::one(),
            exp: 0,
        }
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        Dyadic::new(v.into(), 0)
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn is_integer(&self) -> bool {
        self.exp >= 0
    }

    /// Number of significant bits of the mantissa.
    pub fn bits(&self) -> u64 {
        self.mant.bits()
    }

    /// Position of the leading bit: `|x|` lies in `[2^(m-1), 2^m)` for
    /// `m = magnitude()`. Zero maps to `i64::MIN`.
    pub fn magnitude(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.exp + self.mant.bits() as i64
        }
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    /// Multiplies by `2^k` exactly.
    pub fn shl(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
        }
    }

    /// Rounds toward negative infinity keeping at most `prec` significant bits.
    pub fn round_down(&self, prec: u64) -> Dyadic {
        self.round(prec, false)
    }

    /// Rounds toward positive infinity keeping at most `prec` significant bits.
    pub fn round_up(&self, prec: u64) -> Dyadic {
        self.round(prec, true)
    }

    fn round(&self, prec: u64, up: bool) -> Dyadic {
        let prec = prec.max(2);
        let bits = self.mant.bits();
        if bits <= prec {
            return self.clone();
        }
        let drop = bits - prec;
        let m = if up {
            // ceil(m / 2^drop) = -floor(-m / 2^drop)
            -((-&self.mant) >> drop)
        } else {
            &self.mant >> drop
        };
        Dyadic::new(m, self.exp + drop as i64)
    }

    /// Rounds to a multiple of `2^-frac_bits` toward negative infinity.
    pub fn round_down_abs(&self, frac_bits: i64) -> Dyadic {
        if self.exp >= -frac_bits {
            return self.clone();
        }
        let drop = (-frac_bits - self.exp) as u64;
        Dyadic::new(&self.mant >> drop, -frac_bits)
    }

    /// Rounds to a multiple of `2^-frac_bits` toward positive infinity.
    pub fn round_up_abs(&self, frac_bits: i64) -> Dyadic {
        self.neg().round_down_abs(frac_bits).neg()
    }

    /// `a / b` rounded toward negative infinity (`up = false`) or positive
    /// infinity (`up = true`) with at least `prec` significant bits.
    pub fn div_round(a: &Dyadic, b: &Dyadic, prec: u64, up: bool) -> Dyadic {
        assert!(!b.is_zero(), "division by zero dyadic");
        if a.is_zero() {
            return Dyadic::zero();
        }
        let want = prec as i64 + b.mant.bits() as i64 - a.mant.bits() as i64 + 2;
        let shift = want.max(0) as u64;
        let num = &a.mant << shift;
        let (q, r) = num.div_mod_floor(&b.mant);
        let q = if up && !r.is_zero() { q + 1 } else { q };
        let d = Dyadic::new(q, a.exp - b.exp - shift as i64);
        if up {
            d.round_up(prec)
        } else {
            d.round_down(prec)
        }
    }

    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            // arithmetic shift on BigInt floors for negatives
            &self.mant >> (-self.exp) as u64
        }
    }

    pub fn ceil(&self) -> BigInt {
        -(self.neg().floor())
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as u64)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    /// Largest dyadic with `prec` bits not above `r` (`up = false`), or the
    /// smallest not below it (`up = true`).
    pub fn from_rational_round(r: &BigRational, prec: u64, up: bool) -> Dyadic {
        let n = Dyadic::from_int(r.numer().clone());
        let d = Dyadic::from_int(r.denom().clone());
        if r.denom().is_one() {
            return n;
        }
        let den = r.denom();
        if (den & (den - BigInt::one())).is_zero() {
            // power of two denominator: exact
            let k = den.bits() - 1;
            return n.shl(-(k as i64));
        }
        Dyadic::div_round(&n, &d, prec, up)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let keep = 60i64;
        let (m, e) = if bits > keep {
            (&self.mant >> (bits - keep) as u64, self.exp + bits - keep)
        } else {
            (self.mant.clone(), self.exp)
        };
        let mf = m.to_f64().unwrap_or(f64::NAN);
        mf * 2f64.powi(e.clamp(-2000, 2000) as i32)
    }

    /// Decimal rendering with `digits` significant digits (truncated, for display only).
    pub fn to_sci_string(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let r = self.to_rational();
        let neg = r.is_negative();
        let r = r.abs();
        // find e10 with 10^e10 <= r < 10^(e10+1)
        let approx = self.abs().to_f64();
        let mut e10 = if approx.is_finite() && approx > 0.0 {
            approx.log10().floor() as i64
        } else {
            0
        };
        let ten = BigInt::from(10u32);
        let pow10 = |e: i64| -> BigRational {
            if e >= 0 {
                BigRational::from_integer(num_traits::pow(ten.clone(), e as usize))
            } else {
                BigRational::new(BigInt::one(), num_traits::pow(ten.clone(), (-e) as usize))
            }
        };
        while r < pow10(e10) {
            e10 -= 1;
        }
        while r >= pow10(e10 + 1) {
            e10 += 1;
        }
        let scaled = &r / pow10(e10 - digits as i64 + 1);
        let int = scaled.floor().to_integer().to_string();
        let (head, tail) = int.split_at(1);
        let tail = tail.trim_end_matches('0');
        let sign = if neg { "-" } else { "" };
        if tail.is_empty() {
            format!("{sign}{head}e{e10}")
        } else {
            format!("{sign}{head}.{tail}e{e10}")
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        // same nonzero sign: compare magnitudes first
        let (ma, mb) = (self.magnitude(), other.magnitude());
        if ma != mb {
            let ord = ma.cmp(&mb);
            return if sa > 0 { ord } else { ord.reverse() };
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        a.cmp(&b)
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_int(v)
    }
}

impl From<BigInt> for Dyadic {
    fn from(v: BigInt) -> Self {
        Dyadic::from_int(v)
    }
}

/// Serialized as `<mantissa>*2^<exponent>`, exact.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mant, self.exp)
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let (m, e) = match s.split_once("*2^") {
            Some((m, e)) => (m, e),
            None => (s, "0"),
        };
        let mant: BigInt = m
            .parse()
            .map_err(|_| Error::parse(format!("bad dyadic mantissa `{m}`")))?;
        let exp: i64 = e
            .parse()
            .map_err(|_| Error::parse(format!("bad dyadic exponent `{e}`")))?;
        Ok(Dyadic::new(mant, exp))
    }
}

impl serde::Serialize for Dyadic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Dyadic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(m: i64, e: i64) -> Dyadic {
        Dyadic::new(BigInt::from(m), e)
    }

    #[test]
    fn normalizes_trailing_zeros() {
        assert_eq!(d(12, 0), d(3, 2));
        assert_eq!(d(0, 17), Dyadic::zero());
    }

    #[test]
    fn ordering_across_exponents() {
        assert!(d(3, -1) > d(1, 0));
        assert!(d(-3, -1) < d(-1, 0));
        assert!(d(1, -100) > Dyadic::zero());
        assert!(d(-1, 100) < d(1, -100));
    }

    #[test]
    fn directed_rounding_brackets_value() {
        let x = d(0b1011011, -3);
        let lo = x.round_down(3);
        let hi = x.round_up(3);
        assert!(lo <= x && x <= hi);
        assert!(lo.bits() <= 3 && hi.bits() <= 3);
        let y = x.neg();
        assert!(y.round_down(3) <= y && y <= y.round_up(3));
    }

    #[test]
    fn division_rounding() {
        let one = Dyadic::one();
        let three = Dyadic::from_int(3);
        let lo = Dyadic::div_round(&one, &three, 64, false);
        let hi = Dyadic::div_round(&one, &three, 64, true);
        let third = BigRational::new(1.into(), 3.into());
        assert!(lo.to_rational() < third && third < hi.to_rational());
        assert!(hi.sub(&lo) <= d(1, -64));
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(d(-3, -1).floor(), BigInt::from(-2));
        assert_eq!(d(-3, -1).ceil(), BigInt::from(-1));
        assert_eq!(d(5, 0).floor(), BigInt::from(5));
        assert_eq!(d(5, 0).ceil(), BigInt::from(5));
    }

    #[test]
    fn string_round_trip() {
        let x = d(-12345, -77);
        let s = x.to_string();
        assert_eq!(s.parse::<Dyadic>().unwrap(), x);
    }

    #[test]
    fn sci_string() {
        assert_eq!(d(3, -1).to_sci_string(5), "1.5e0");
        assert_eq!(d(-1, -2).to_sci_string(3), "-2.5e-1");
    }
}
