//! Exact descriptions of `theta > 1` and of `log theta`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::contfrac::{value_from_cf, CfTerms};
use crate::error::{Error, Result};
use crate::realnum::{log_ball, Ball, QuadIrr, RealSpec, RefinePolicy};

/// Which closed form `theta` was given in.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ThetaKind {
    /// `theta = u/v`.
    Rational(BigRational),
    /// `theta = e^(p/q)`.
    ExpRational(BigRational),
    /// `theta = e^w` for an irrational quadratic `w`.
    ExpQuadratic(QuadIrr),
    /// `theta = e^(2/l)` where `l` has the given (eventually periodic) expansion.
    FromCf(CfTerms),
}

/// `log theta`, classified exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LogTheta {
    Rational(BigRational),
    Quadratic(QuadIrr),
    /// `log` of the rational `theta`; irrational for every rational `theta > 1`.
    LogOfRational(BigRational),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ThetaSpec {
    kind: ThetaKind,
    log: LogTheta,
}

impl ThetaSpec {
    pub fn new(kind: ThetaKind) -> Result<Self> {
        let log = match &kind {
            ThetaKind::Rational(r) => {
                if *r <= BigRational::one() {
                    return Err(Error::input(format!("theta = {r} must exceed 1")));
                }
                LogTheta::LogOfRational(r.clone())
            }
            ThetaKind::ExpRational(w) => {
                if !w.is_positive() {
                    return Err(Error::input(format!("exponent {w} must be positive so theta > 1")));
                }
                LogTheta::Rational(w.clone())
            }
            ThetaKind::ExpQuadratic(w) => {
                if w.is_rational() {
                    return Err(Error::input(
                        "exp-quadratic exponent is rational; use exp-rational",
                    ));
                }
                if w.signum() <= 0 {
                    return Err(Error::input(format!("exponent {w} must be positive so theta > 1")));
                }
                LogTheta::Quadratic(w.clone())
            }
            ThetaKind::FromCf(terms) => {
                if !terms.is_periodic() {
                    return Err(Error::input(
                        "from-cf needs an eventually periodic expansion (a finite one is rational)",
                    ));
                }
                let ell = match value_from_cf(terms)? {
                    RealSpec::QuadIrr(q) => q,
                    other => {
                        return Err(Error::Internal(format!(
                            "periodic expansion reconstructed as {other}"
                        )))
                    }
                };
                if ell.signum() <= 0 {
                    return Err(Error::input("l must be positive so theta = e^(2/l) > 1"));
                }
                let two = QuadIrr::from_int(2);
                LogTheta::Quadratic(two.div(&ell)?)
            }
        };
        Ok(ThetaSpec { kind, log })
    }

    pub fn rational(u: i64, v: i64) -> Result<Self> {
        if v == 0 {
            return Err(Error::input("zero denominator"));
        }
        ThetaSpec::new(ThetaKind::Rational(BigRational::new(u.into(), v.into())))
    }

    pub fn exp_rational(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::input("zero denominator"));
        }
        ThetaSpec::new(ThetaKind::ExpRational(BigRational::new(p.into(), q.into())))
    }

    pub fn exp_quadratic(w: QuadIrr) -> Result<Self> {
        ThetaSpec::new(ThetaKind::ExpQuadratic(w))
    }

    pub fn from_cf(terms: CfTerms) -> Result<Self> {
        ThetaSpec::new(ThetaKind::FromCf(terms))
    }

    pub fn kind(&self) -> &ThetaKind {
        &self.kind
    }

    pub fn log(&self) -> &LogTheta {
        &self.log
    }

    pub fn log_is_rational(&self) -> bool {
        matches!(self.log, LogTheta::Rational(_))
    }

    /// `theta` itself when it is rational.
    pub fn rational_value(&self) -> Option<&BigRational> {
        match &self.kind {
            ThetaKind::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// The exact expansion of `2 / log theta` when `theta` was built from it.
    pub fn cf_terms(&self) -> Option<&CfTerms> {
        match &self.kind {
            ThetaKind::FromCf(t) => Some(t),
            _ => None,
        }
    }

    /// `m / log theta` in exact form when `log theta` is rational or quadratic.
    pub fn recip_log_exact(&self, m: &BigRational) -> Option<QuadIrr> {
        match &self.log {
            LogTheta::Rational(r) => Some(QuadIrr::from_rational(&(m / r))),
            LogTheta::Quadratic(q) => Some(
                q.recip()
                    .expect("log theta > 0")
                    .mul_rational(m),
            ),
            LogTheta::LogOfRational(_) => None,
        }
    }

    pub fn log_ball(&self, prec: u64) -> Ball {
        match &self.log {
            LogTheta::Rational(r) => Ball::from_rational(r, prec),
            LogTheta::Quadratic(q) => q.to_ball(prec),
            LogTheta::LogOfRational(r) => {
                let x = Ball::from_rational(r, prec + 8);
                log_ball(&x, prec).expect("theta > 1")
            }
        }
    }

    /// Encloses `theta` itself.
    pub fn value_ball(&self, prec: u64) -> Ball {
        match &self.kind {
            ThetaKind::Rational(r) => Ball::from_rational(r, prec),
            _ => crate::realnum::exp_ball(&self.log_ball(prec + 16), prec),
        }
    }

    /// Certified comparison `log theta < bound` for a rational bound.
    /// Exact for rational or quadratic logs, refined otherwise.
    pub fn log_lt(&self, bound: &BigRational, policy: &RefinePolicy) -> Result<bool> {
        match &self.log {
            LogTheta::Rational(r) => Ok(r < bound),
            LogTheta::Quadratic(q) => Ok(q.sub(&QuadIrr::from_rational(bound))?.signum() < 0),
            LogTheta::LogOfRational(_) => {
                // log r = bound only when r = e^bound, impossible unless bound = 0
                if bound.is_zero() {
                    return Ok(false);
                }
                for prec in policy.precisions() {
                    let l = self.log_ball(prec);
                    let b = Ball::from_rational(bound, prec);
                    if l.lt(&b) {
                        return Ok(true);
                    }
                    if l.gt(&b) {
                        return Ok(false);
                    }
                }
                Err(Error::undecided(policy.cap_bits, "log theta against a rational bound"))
            }
        }
    }

    /// `theta < e^k`.
    pub fn lt_exp(&self, k: i64, policy: &RefinePolicy) -> Result<bool> {
        self.log_lt(&BigRational::from_integer(k.into()), policy)
    }

    /// `n > log2(theta)`, i.e. `theta < 2^n`, for `n >= 1`.
    pub fn n_exceeds_log2(&self, n: &BigInt, policy: &RefinePolicy) -> Result<bool> {
        if let ThetaKind::Rational(r) = &self.kind {
            let ub = r.numer().bits();
            if *n > BigInt::from(ub) {
                return Ok(true);
            }
            let k = n.to_u64().unwrap_or(0);
            return Ok(*r.numer() < (r.denom() << k));
        }
        // e^w = 2^n is impossible for algebraic w, so refinement terminates
        for prec in policy.precisions() {
            let l = self.log_ball(prec);
            let two_n = crate::realnum::ln2(prec).mul_int(n, prec);
            if l.lt(&two_n) {
                return Ok(true);
            }
            if l.gt(&two_n) {
                return Ok(false);
            }
        }
        Err(Error::undecided(policy.cap_bits, "n against log2(theta)"))
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::parse(format!("`{s}` is not a rational u/v"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

pub(crate) fn fmt_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub(crate) fn parse_rational_str(s: &str) -> Result<BigRational> {
    parse_rational(s)
}

impl fmt::Display for ThetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ThetaKind::Rational(r) => write!(f, "rational:{}", fmt_rational(r)),
            ThetaKind::ExpRational(r) => write!(f, "exp-rational:{}", fmt_rational(r)),
            ThetaKind::ExpQuadratic(q) => write!(f, "exp-quadratic:{q}"),
            ThetaKind::FromCf(t) => write!(f, "from-cf:{t}"),
        }
    }
}

impl FromStr for ThetaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (tag, body) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(format!("theta `{s}` needs a kind prefix, e.g. rational:2/1")))?;
        let kind = match tag {
            "rational" => ThetaKind::Rational(parse_rational(body)?),
            "exp-rational" => ThetaKind::ExpRational(parse_rational(body)?),
            "exp-quadratic" => ThetaKind::ExpQuadratic(body.parse()?),
            "from-cf" => ThetaKind::FromCf(body.parse()?),
            other => return Err(Error::parse(format!("unknown theta kind `{other}`"))),
        };
        ThetaSpec::new(kind)
    }
}

impl serde::Serialize for ThetaSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for ThetaSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
