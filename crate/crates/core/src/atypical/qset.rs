//! Good denominators `Q_theta`: integers `n` with some `m` such that
//! `0 < m - n/log theta < 1/(2n)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{compare_lambda, recip_log_expansion, require_irrational_log, LambdaComparison, Threshold};
use crate::error::{Error, Result};
use crate::mtheta::ThetaSpec;
use crate::realnum::{Ball, RefinePolicy};

/// `n = c S_{2i-1}` with `2c^2 < tau_{2i}` in the expansion of `1/log theta`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuantRoute {
    #[serde(with = "crate::serde_big")]
    pub c: BigInt,
    pub i: usize,
    pub comparison: LambdaComparison,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QMembership {
    #[serde(with = "crate::serde_big")]
    pub n: BigInt,
    pub member: bool,
    /// `ceil(n/log theta)`, the only possible `m`.
    #[serde(with = "crate::serde_big::opt")]
    pub m: Option<BigInt>,
    /// Encloses `m - n/log theta`.
    pub gap: Ball,
    /// `1/(2n)`.
    pub bound: Ball,
    pub exact: bool,
    pub continuant: Option<ContinuantRoute>,
}

/// `(ceil(n/L) - n/L) < 1/(2n)` decided exactly or by refinement.
fn witness_route(theta: &ThetaSpec, n: &BigInt, policy: &RefinePolicy) -> Result<(bool, BigInt, Ball, bool)> {
    let half_n = BigRational::new(BigInt::one(), BigInt::from(2) * n);
    if let Some(q) = theta.recip_log_exact(&BigRational::from_integer(n.clone())) {
        let m = q.ceil();
        let gap = q.neg().add_rational(&BigRational::from_integer(m.clone()));
        let member = gap.add_rational(&-half_n.clone()).signum() < 0;
        return Ok((member, m, gap.to_ball(64), true));
    }
    for w in policy.precisions() {
        let wp = w + 2 * n.bits() + 32;
        let x = theta.log_ball(wp).recip(wp).expect("log theta > 0").mul_int(n, wp);
        let Some((fl, fr)) = x.frac() else { continue };
        let gap = Ball::one().sub(&fr, w);
        let b = Ball::from_rational(&half_n, w);
        if gap.lt(&b) {
            return Ok((true, fl + 1, gap, false));
        }
        if gap.lo() >= b.hi() {
            return Ok((false, fl + 1, gap, false));
        }
    }
    Err(Error::undecided(policy.cap_bits, format!("{n} against Q_theta")))
}

fn continuant_route(theta: &ThetaSpec, n: &BigInt, policy: &RefinePolicy) -> Result<Option<ContinuantRoute>> {
    let cf = recip_log_expansion(theta, 1, n, policy)?;
    let known = cf.known_len();
    let mut j = 1;
    while known.is_none_or(|l| j + 1 < l) {
        let s = cf.convergent(j)?.den;
        if &s > n {
            return Ok(None);
        }
        let (c, r) = n.div_rem(&s);
        if r.is_zero() {
            let thr = Threshold::Rational(BigRational::from_integer(BigInt::from(2) * &c * &c));
            let cmp = compare_lambda(&cf, j + 1, &thr, policy)?;
            match cmp.exceeds {
                Some(true) => {
                    return Ok(Some(ContinuantRoute {
                        c,
                        i: j.div_ceil(2),
                        comparison: cmp,
                    }))
                }
                Some(false) => {}
                None => {
                    return Err(Error::undecided(
                        policy.cap_bits,
                        format!("tau_{} against 2c^2 for n = {n}", j + 1),
                    ))
                }
            }
        }
        j += 2;
    }
    Err(Error::undecided(
        policy.cap_bits,
        format!("expansion of 1/log theta too short to reach {n}"),
    ))
}

/// Decides `n in Q_theta` by the defining inequality and by the odd
/// continuants of `1/log theta`, and requires the two to agree.
pub fn q_set_membership(theta: &ThetaSpec, n: &BigInt, policy: &RefinePolicy) -> Result<QMembership> {
    require_irrational_log(theta)?;
    if !n.is_positive() {
        return Err(Error::input("Q_theta membership needs n >= 1"));
    }
    let (member, m, gap, exact) = witness_route(theta, n, policy)?;
    let continuant = continuant_route(theta, n, policy)?;
    if member != continuant.is_some() {
        return Err(Error::Internal(format!(
            "Q_theta routes disagree for n = {n}, theta = {theta}: inequality {member}, continuants {:?}",
            continuant
        )));
    }
    Ok(QMembership {
        n: n.clone(),
        member,
        m: member.then_some(m),
        bound: Ball::from_rational(&BigRational::new(BigInt::one(), BigInt::from(2) * n), 64),
        gap,
        exact,
        continuant,
    })
}
