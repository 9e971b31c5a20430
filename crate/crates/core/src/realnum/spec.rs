//! Symbolic real values that can be enclosed at any precision.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::ball::Ball;
use super::elementary::log_ball;
use super::quad::QuadIrr;
use crate::contfrac::{value_from_cf, CfTerms};
use crate::error::{Error, Result};
use crate::mtheta::theta::{fmt_rational, parse_rational_str};
use crate::mtheta::ThetaSpec;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RealSpec {
    Rational(BigRational),
    /// `sqrt(r)`, `r >= 0`.
    SqrtRational(BigRational),
    QuadIrr(QuadIrr),
    /// `log theta` for rational `theta > 1`.
    LogOfRational(BigRational),
    /// `multiplier / log theta`.
    RecipLogTheta {
        theta: ThetaSpec,
        multiplier: BigRational,
    },
    /// The value `[a0; a1, ...]` of an eventually periodic or finite expansion.
    ContinuedFraction(CfTerms),
    /// `scale * inner + offset`.
    Affine {
        inner: Box<RealSpec>,
        scale: BigRational,
        offset: BigRational,
    },
}

/// A value with an exact representation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exact {
    Rational(BigRational),
    Quadratic(QuadIrr),
}

impl Exact {
    pub fn to_quad(&self) -> QuadIrr {
        match self {
            Exact::Rational(r) => QuadIrr::from_rational(r),
            Exact::Quadratic(q) => q.clone(),
        }
    }
}

impl RealSpec {
    pub fn rational(p: i64, q: i64) -> RealSpec {
        RealSpec::Rational(BigRational::new(p.into(), q.into()))
    }

    pub fn recip_log(theta: ThetaSpec, m: i64) -> RealSpec {
        RealSpec::RecipLogTheta {
            theta,
            multiplier: BigRational::from_integer(m.into()),
        }
    }

    pub fn affine(inner: RealSpec, scale: BigRational, offset: BigRational) -> RealSpec {
        RealSpec::Affine {
            inner: Box::new(inner),
            scale,
            offset,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RealSpec::Rational(_) | RealSpec::QuadIrr(_) | RealSpec::RecipLogTheta { .. } => Ok(()),
            RealSpec::SqrtRational(r) => {
                if r.is_negative() {
                    Err(Error::input("sqrt of a negative rational"))
                } else {
                    Ok(())
                }
            }
            RealSpec::LogOfRational(r) => {
                if *r <= BigRational::one() {
                    Err(Error::input(format!("log argument {r} must exceed 1")))
                } else {
                    Ok(())
                }
            }
            RealSpec::ContinuedFraction(_) => Ok(()),
            RealSpec::Affine { inner, .. } => inner.validate(),
        }
    }

    /// The exact value when the spec lives in `Q` or a real quadratic field.
    pub fn exact(&self) -> Option<Exact> {
        match self {
            RealSpec::Rational(r) => Some(Exact::Rational(r.clone())),
            RealSpec::SqrtRational(r) => {
                let q = QuadIrr::sqrt_rational(r).ok()?;
                Some(match q.as_rational() {
                    Some(r) => Exact::Rational(r),
                    None => Exact::Quadratic(q),
                })
            }
            RealSpec::QuadIrr(q) => Some(match q.as_rational() {
                Some(r) => Exact::Rational(r),
                None => Exact::Quadratic(q.clone()),
            }),
            RealSpec::LogOfRational(_) => None,
            RealSpec::RecipLogTheta { theta, multiplier } => {
                let q = theta.recip_log_exact(multiplier)?;
                Some(match q.as_rational() {
                    Some(r) => Exact::Rational(r),
                    None => Exact::Quadratic(q),
                })
            }
            RealSpec::ContinuedFraction(t) => value_from_cf(t).ok()?.exact(),
            RealSpec::Affine {
                inner,
                scale,
                offset,
            } => Some(match inner.exact()? {
                Exact::Rational(r) => Exact::Rational(r * scale + offset),
                Exact::Quadratic(q) => Exact::Quadratic(q.mul_rational(scale).add_rational(offset)),
            }),
        }
    }

    /// `true` when the value is known to be irrational from its form alone.
    pub fn is_certainly_irrational(&self) -> bool {
        match self {
            RealSpec::LogOfRational(_) => true,
            RealSpec::RecipLogTheta { multiplier, theta } => {
                !multiplier.is_zero() && !theta.log_is_rational()
            }
            RealSpec::Affine { inner, scale, .. } => {
                !scale.is_zero() && inner.is_certainly_irrational()
            }
            other => matches!(other.exact(), Some(Exact::Quadratic(_))),
        }
    }

    /// Encloses the value using working precision `prec`. The width is
    /// roughly `2^-prec` relative to the magnitude, not guaranteed.
    pub fn ball_at(&self, prec: u64) -> Result<Ball> {
        Ok(match self {
            RealSpec::Rational(r) => Ball::from_rational(r, prec),
            RealSpec::SqrtRational(r) => {
                if r.is_negative() {
                    return Err(Error::input("sqrt of a negative rational"));
                }
                Ball::from_rational(r, prec + 8)
                    .sqrt(prec)
                    .expect("nonnegative")
            }
            RealSpec::QuadIrr(q) => q.to_ball(prec),
            RealSpec::LogOfRational(r) => {
                self.validate()?;
                log_ball(&Ball::from_rational(r, prec + 8), prec).expect("r > 1")
            }
            RealSpec::RecipLogTheta { theta, multiplier } => {
                let l = theta.log_ball(prec + 8);
                Ball::from_rational(multiplier, prec + 8)
                    .div(&l, prec)
                    .expect("log theta > 0")
            }
            RealSpec::ContinuedFraction(t) => value_from_cf(t)?.ball_at(prec)?,
            RealSpec::Affine {
                inner,
                scale,
                offset,
            } => {
                let wp = prec + 8;
                inner
                    .ball_at(wp)?
                    .mul_rational(scale, wp)
                    .add(&Ball::from_rational(offset, wp), prec)
            }
        })
    }
}

/// Encloses `x` in a ball of width at most `2^-p`.
///
/// Working precision follows a fixed schedule and the enclosures are
/// intersected as it grows, so results for larger `p` nest inside results
/// for smaller `p`.
pub fn eval(x: &RealSpec, p: u64) -> Result<Ball> {
    if p < 2 {
        return Err(Error::input("eval precision must be at least 2 bits"));
    }
    x.validate()?;
    let p = p as i64;
    let mut acc: Option<Ball> = None;
    let mut prec: u64 = 64;
    loop {
        let b = x.ball_at(prec)?;
        let cur = match acc {
            None => b,
            Some(prev) => prev.intersect(&b).ok_or_else(|| {
                Error::Internal(format!("disjoint enclosures for {x} at {prec} bits"))
            })?,
        };
        if cur.width_within(p) {
            return Ok(cur);
        }
        acc = Some(cur);
        prec = prec
            .checked_mul(2)
            .ok_or_else(|| Error::Internal("precision overflow".into()))?;
    }
}

fn fmt_multiplier(m: &BigRational) -> String {
    if m.denom().is_one() {
        m.numer().to_string()
    } else {
        format!("({})", fmt_rational(m))
    }
}

impl fmt::Display for RealSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealSpec::Rational(r) => write!(f, "rat:{}", fmt_rational(r)),
            RealSpec::SqrtRational(r) => write!(f, "sqrt:{}", fmt_rational(r)),
            RealSpec::QuadIrr(q) => write!(f, "quad:{q}"),
            RealSpec::LogOfRational(r) => write!(f, "log:{}", fmt_rational(r)),
            RealSpec::RecipLogTheta { theta, multiplier } => {
                write!(f, "{}/log({theta})", fmt_multiplier(multiplier))
            }
            RealSpec::ContinuedFraction(t) => write!(f, "cf:{t}"),
            RealSpec::Affine {
                inner,
                scale,
                offset,
            } => write!(
                f,
                "affine:{},{},{inner}",
                fmt_rational(scale),
                fmt_rational(offset)
            ),
        }
    }
}

impl FromStr for RealSpec {
    type Err = Error;

    /// Grammar: `rat:p/q`, `sqrt:p/q`, `quad:(a+b*sqrt(d))/c`, `log:u/v`,
    /// `<m>/log(<theta>)` with `m` an integer or `(p/q)`, `cf:[...]`,
    /// `affine:<scale>,<offset>,<inner>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix("rat:") {
            return Ok(RealSpec::Rational(parse_rational_str(body)?));
        }
        if let Some(body) = s.strip_prefix("sqrt:") {
            let spec = RealSpec::SqrtRational(parse_rational_str(body)?);
            spec.validate()?;
            return Ok(spec);
        }
        if let Some(body) = s.strip_prefix("quad:") {
            return Ok(RealSpec::QuadIrr(body.parse()?));
        }
        if let Some(body) = s.strip_prefix("log:") {
            let spec = RealSpec::LogOfRational(parse_rational_str(body)?);
            spec.validate()?;
            return Ok(spec);
        }
        if let Some(body) = s.strip_prefix("cf:") {
            return Ok(RealSpec::ContinuedFraction(body.parse()?));
        }
        if let Some(body) = s.strip_prefix("affine:") {
            let mut parts = body.splitn(3, ',');
            let scale = parts.next().ok_or_else(|| Error::parse("affine needs scale"))?;
            let offset = parts.next().ok_or_else(|| Error::parse("affine needs offset"))?;
            let inner = parts.next().ok_or_else(|| Error::parse("affine needs an inner value"))?;
            return Ok(RealSpec::affine(
                inner.parse()?,
                parse_rational_str(scale)?,
                parse_rational_str(offset)?,
            ));
        }
        if let Some(pos) = s.find("/log(") {
            let m_str = s[..pos].trim();
            let m_str = m_str
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .unwrap_or(m_str);
            let multiplier = parse_rational_str(m_str)?;
            let theta_str = s[pos + "/log(".len()..]
                .strip_suffix(')')
                .ok_or_else(|| Error::parse(format!("unclosed log( in `{s}`")))?;
            let theta: ThetaSpec = theta_str.parse()?;
            return Ok(RealSpec::RecipLogTheta { theta, multiplier });
        }
        // bare integers and fractions are rationals
        if let Ok(r) = parse_rational_str(s) {
            return Ok(RealSpec::Rational(r));
        }
        Err(Error::parse(format!("unrecognized real value `{s}`")))
    }
}

impl serde::Serialize for RealSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for RealSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
