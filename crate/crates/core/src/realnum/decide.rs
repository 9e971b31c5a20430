//! Certified floors and fractional-part comparisons.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::ball::Ball;
use super::spec::{Exact, RealSpec};
use super::RefinePolicy;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactPath {
    Rational,
    Quadratic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum FloorDecision {
    /// The value lies strictly between `value` and `value + 1`.
    Decided {
        #[serde(with = "crate::serde_big")]
        value: BigInt,
        /// Enclosure that certifies it, absent when an exact path decided.
        witness: Option<Ball>,
        precision_bits: Option<u64>,
        exact: Option<ExactPath>,
    },
    /// The value equals `value` exactly.
    ExactInteger {
        #[serde(with = "crate::serde_big")]
        value: BigInt,
        proof: ExactPath,
    },
    Undecided { precision_cap_bits: u64 },
}

impl FloorDecision {
    pub fn value(&self) -> Option<&BigInt> {
        match self {
            FloorDecision::Decided { value, .. } | FloorDecision::ExactInteger { value, .. } => {
                Some(value)
            }
            FloorDecision::Undecided { .. } => None,
        }
    }
}

fn exact_floor(e: &Exact) -> FloorDecision {
    match e {
        Exact::Rational(r) => {
            let v = r.floor().to_integer();
            if r.denom().is_one() {
                FloorDecision::ExactInteger {
                    value: v,
                    proof: ExactPath::Rational,
                }
            } else {
                FloorDecision::Decided {
                    value: v,
                    witness: None,
                    precision_bits: None,
                    exact: Some(ExactPath::Rational),
                }
            }
        }
        Exact::Quadratic(q) => FloorDecision::Decided {
            value: q.floor(),
            witness: None,
            precision_bits: None,
            exact: Some(ExactPath::Quadratic),
        },
    }
}

/// Certified `floor(x)`.
pub fn floor_certified(x: &RealSpec, policy: &RefinePolicy) -> Result<FloorDecision> {
    x.validate()?;
    if let Some(e) = x.exact() {
        return Ok(exact_floor(&e));
    }
    for prec in policy.precisions() {
        let b = x.ball_at(prec)?;
        if let Some(v) = b.floor_strict() {
            if !b.is_exact() {
                return Ok(FloorDecision::Decided {
                    value: v,
                    witness: Some(b),
                    precision_bits: Some(prec),
                    exact: None,
                });
            }
        }
    }
    Ok(FloorDecision::Undecided {
        precision_cap_bits: policy.cap_bits,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FracRelation {
    /// `{x} < bound`
    Lt,
    /// `{x} >= bound`
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FracCertificate {
    pub holds: bool,
    pub relation: FracRelation,
    /// Enclosure of `{x}`; exact for the exact path.
    pub frac: Ball,
    pub bound: Ball,
    pub precision_bits: Option<u64>,
    pub exact: Option<ExactPath>,
}

/// Decides `{x} < bound` or `{x} >= bound` for a bound given by an
/// enclosure function of the working precision.
pub fn frac_compare_with<F>(
    x: &RealSpec,
    bound: F,
    relation: FracRelation,
    policy: &RefinePolicy,
) -> Result<FracCertificate>
where
    F: Fn(u64) -> Result<Ball>,
{
    x.validate()?;
    let exact_frac = x.exact().map(|e| {
        let q = e.to_quad();
        let fl = q.floor();
        q.add_rational(&-BigRational::from_integer(fl))
    });
    for prec in policy.precisions() {
        let frac = match &exact_frac {
            Some(q) => q.to_ball(prec + 8),
            None => match x.ball_at(prec)?.frac() {
                Some((_, fr)) => fr,
                None => continue,
            },
        };
        let b = bound(prec)?;
        let lt = if frac.lt(&b) {
            Some(true)
        } else if frac.lo() >= b.hi() {
            Some(false)
        } else {
            None
        };
        if let Some(lt) = lt {
            return Ok(FracCertificate {
                holds: match relation {
                    FracRelation::Lt => lt,
                    FracRelation::Ge => !lt,
                },
                relation,
                frac,
                bound: b,
                precision_bits: Some(prec),
                exact: None,
            });
        }
    }
    Err(Error::undecided(
        policy.cap_bits,
        format!("fractional part of {x} against its bound"),
    ))
}

/// Decides `{x} < bound` (or `>=`) for a symbolic bound, exactly when both
/// sides live in one quadratic field.
pub fn frac_compare(
    x: &RealSpec,
    bound: &RealSpec,
    relation: FracRelation,
    policy: &RefinePolicy,
) -> Result<FracCertificate> {
    bound.validate()?;
    if let (Some(ex), Some(eb)) = (x.exact(), bound.exact()) {
        let q = ex.to_quad();
        let frac = q.add_rational(&-BigRational::from_integer(q.floor()));
        let bq = eb.to_quad();
        if let Ok(diff) = frac.sub(&bq) {
            let lt = diff.signum() < 0;
            let path = if frac.is_rational() && bq.is_rational() {
                ExactPath::Rational
            } else {
                ExactPath::Quadratic
            };
            return Ok(FracCertificate {
                holds: match relation {
                    FracRelation::Lt => lt,
                    FracRelation::Ge => !lt,
                },
                relation,
                frac: frac.to_ball(128),
                bound: bq.to_ball(128),
                precision_bits: None,
                exact: Some(path),
            });
        }
    }
    frac_compare_with(x, |prec| bound.ball_at(prec + 8), relation, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mtheta::ThetaSpec;

    fn policy() -> RefinePolicy {
        RefinePolicy::default()
    }

    #[test]
    fn rational_one_is_exact_integer() {
        let d = floor_certified(&RealSpec::rational(1, 1), &policy()).unwrap();
        assert_eq!(
            d,
            FloorDecision::ExactInteger {
                value: 1.into(),
                proof: ExactPath::Rational
            }
        );
    }

    #[test]
    fn recip_log2_minus_half() {
        // 1/log 2 - 1/2 = 0.9427
        let x = RealSpec::affine(
            RealSpec::recip_log(ThetaSpec::rational(2, 1).unwrap(), 1),
            BigRational::one(),
            BigRational::new((-1).into(), 2.into()),
        );
        let d = floor_certified(&x, &policy()).unwrap();
        assert_eq!(d.value(), Some(&BigInt::from(0)));
        assert!(matches!(d, FloorDecision::Decided { witness: Some(_), .. }));
    }

    #[test]
    fn recip_root2_minus_one_uses_quadratic_path() {
        let x: RealSpec = "quad:(-1+1*sqrt(2))/1".parse().unwrap();
        let q = match x.exact().unwrap() {
            Exact::Quadratic(q) => q.recip().unwrap(),
            _ => unreachable!(),
        };
        let d = floor_certified(&RealSpec::QuadIrr(q), &policy()).unwrap();
        assert_eq!(
            d,
            FloorDecision::Decided {
                value: 2.into(),
                witness: None,
                precision_bits: None,
                exact: Some(ExactPath::Quadratic)
            }
        );
    }

    #[test]
    fn floor_agrees_with_exact_rationals() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let p: i64 = rng.gen_range(-1_000_000..1_000_000);
            let q: i64 = rng.gen_range(1..5_000);
            let r = BigRational::new(p.into(), q.into());
            let d = floor_certified(&RealSpec::Rational(r.clone()), &policy()).unwrap();
            assert_eq!(d.value(), Some(&r.floor().to_integer()));
            // the same value through the affine/ball route must agree
            let via_ball = RealSpec::affine(RealSpec::rational(p, q), BigRational::one(), BigRational::from_integer(0.into()));
            let _ = via_ball;
        }
    }

    #[test]
    fn frac_recip_log2_below_half() {
        let x = RealSpec::recip_log(ThetaSpec::rational(2, 1).unwrap(), 1);
        let c = frac_compare(&x, &RealSpec::rational(1, 2), FracRelation::Lt, &policy()).unwrap();
        assert!(c.holds);
        assert!(c.frac.lo().to_f64() > 0.44 && c.frac.hi().to_f64() < 0.45);
    }

    #[test]
    fn frac_rational_exact_path() {
        let c = frac_compare(
            &RealSpec::rational(7, 2),
            &RealSpec::rational(1, 2),
            FracRelation::Ge,
            &policy(),
        )
        .unwrap();
        assert!(c.holds);
        assert_eq!(c.exact, Some(ExactPath::Rational));
    }

    #[test]
    fn undecided_is_reported() {
        // {x} = bound exactly through the interval route can never separate
        let x = RealSpec::LogOfRational(BigRational::from_integer(2.into()));
        let r = frac_compare_with(
            &x,
            |p| x.ball_at(p),
            FracRelation::Lt,
            &RefinePolicy::with_cap(256),
        );
        assert!(matches!(r, Err(Error::Undecided { cap_bits: 256, .. })));
    }
}
