//! Classification of a continuant `B_{2k-1}` of `2/log theta` as typical,
//! a good denominator, or atypical.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{
    compare_lambda, q_set_membership, recip_log_expansion, require_irrational_log, LambdaComparison,
    QMembership, Threshold,
};
use crate::contfrac::CFExpansion;
use crate::error::{Error, Result};
use crate::mtheta::{LogTheta, MembershipOptions, MembershipResult, ThetaContext, ThetaSpec};
use crate::realnum::{Ball, RealSpec, RefinePolicy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContinuantClass {
    Typical,
    InQ,
    Atypical,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub theta: ThetaSpec,
    pub k: usize,
    pub k0: usize,
    pub delta: RealSpec,
    /// `B_{2k-1}`.
    #[serde(with = "crate::serde_big")]
    pub n: BigInt,
    /// `lambda_{2k} >= 6/(log theta - delta)`.
    pub lemma_applies: bool,
    pub comparison: LambdaComparison,
    pub q: Option<QMembership>,
    pub membership: MembershipResult,
    pub class: ContinuantClass,
}

/// `delta = (log theta)/2`.
pub fn default_delta(theta: &ThetaSpec) -> RealSpec {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    match theta.log() {
        LogTheta::Rational(r) => RealSpec::Rational(r * &half),
        LogTheta::Quadratic(q) => RealSpec::QuadIrr(q.mul_rational(&half)),
        LogTheta::LogOfRational(r) => RealSpec::affine(RealSpec::LogOfRational(r.clone()), half, BigRational::zero()),
    }
}

/// An expansion of `2/log theta` with term `idx` certified.
fn expansion_to_index(theta: &ThetaSpec, idx: usize, policy: &RefinePolicy) -> Result<CFExpansion> {
    let mut bound = BigInt::one() << 64u32;
    loop {
        let cf = recip_log_expansion(theta, 2, &bound, policy)?;
        match cf.known_len() {
            None => return Ok(cf),
            Some(l) if l > idx => return Ok(cf),
            Some(l) => {
                let grown = recip_log_expansion(theta, 2, &(&bound * &bound), policy)?;
                if grown.known_len() == Some(l) {
                    return Err(Error::undecided(
                        policy.cap_bits,
                        format!("expansion of 2/log theta stops at index {}", l - 1),
                    ));
                }
                bound = &bound * &bound;
            }
        }
    }
}

/// `0 < delta < log theta`, certified.
fn check_delta(theta: &ThetaSpec, delta: &RealSpec, policy: &RefinePolicy) -> Result<()> {
    delta.validate()?;
    for w in policy.precisions() {
        let d = delta.ball_at(w)?;
        let l = theta.log_ball(w);
        if d.is_positive() && d.lt(&l) {
            return Ok(());
        }
        if d.hi().signum() <= 0 || d.lo() >= l.hi() {
            return Err(Error::input(format!("delta = {delta} must lie in (0, log theta)")));
        }
    }
    Err(Error::undecided(policy.cap_bits, "delta against (0, log theta)"))
}

/// Smallest `k >= 3` with `B_{2k-1}^2 > (log theta)^3 / (60 delta)`.
pub fn k0(theta: &ThetaSpec, delta: &RealSpec, policy: &RefinePolicy) -> Result<usize> {
    for w in policy.precisions() {
        let l = theta.log_ball(w + 16);
        let Some(rhs) = l
            .mul(&l, w + 16)
            .mul(&l, w + 16)
            .div(&delta.ball_at(w + 16)?.mul_int(&BigInt::from(60), w + 16), w)
        else {
            continue;
        };
        let top = rhs.hi().floor() + 1;
        let cf = recip_log_expansion(theta, 2, &top, policy)?;
        let mut k = 3;
        loop {
            if cf.known_len().is_some_and(|n| 2 * k > n) {
                break;
            }
            let b = cf.convergent(2 * k - 1)?.den;
            let sq = Ball::from_int(&b * &b);
            if sq.gt(&rhs) {
                return Ok(k);
            }
            if sq.hi() <= rhs.lo() {
                k += 1;
                continue;
            }
            // straddles: refine
            break;
        }
    }
    Err(Error::undecided(policy.cap_bits, "k0(delta)"))
}

/// Classifies `B_{2k-1}` for `1 < theta < e^6` with irrational `log theta`.
/// When `lambda_{2k} >= 6/(log theta - delta)` the continuant lies in
/// `Q_theta` or `A_theta`, and both are checked.
pub fn classify_continuant(
    theta: &ThetaSpec,
    k: usize,
    delta: Option<RealSpec>,
    opts: &MembershipOptions,
) -> Result<Classification> {
    require_irrational_log(theta)?;
    let policy = &opts.policy;
    if !theta.lt_exp(6, policy)? {
        return Err(Error::Unsupported(format!("{theta} is not below e^6")));
    }
    let delta = delta.unwrap_or_else(|| default_delta(theta));
    check_delta(theta, &delta, policy)?;
    let k0 = k0(theta, &delta, policy)?;
    if k < k0 {
        return Err(Error::input(format!(
            "k = {k} is below k0 = {k0} for delta = {delta}"
        )));
    }
    let cf = expansion_to_index(theta, 2 * k + 1, policy)?;
    let n = cf.convergent(2 * k - 1)?.den;
    let thr = Threshold::OverLogMinus {
        theta: theta.clone(),
        scale: BigRational::from_integer(BigInt::from(6)),
        delta: delta.clone(),
    };
    let comparison = compare_lambda(&cf, 2 * k, &thr, policy)?;
    let lemma_applies = match comparison.exceeds {
        Some(e) => e || comparison.equal,
        None => {
            return Err(Error::undecided(
                policy.cap_bits,
                format!("lambda_{} against 6/(log theta - delta)", 2 * k),
            ))
        }
    };
    let membership = ThetaContext::new(theta.clone(), *policy).is_atypical(&n, opts.paranoid)?;
    let q = if lemma_applies {
        Some(q_set_membership(theta, &n, policy)?)
    } else {
        None
    };
    let class = if membership.atypical {
        ContinuantClass::Atypical
    } else if q.as_ref().is_some_and(|q| q.member) {
        ContinuantClass::InQ
    } else {
        ContinuantClass::Typical
    };
    let out = Classification {
        theta: theta.clone(),
        k,
        k0,
        delta,
        n,
        lemma_applies,
        comparison,
        q,
        membership,
        class,
    };
    if lemma_applies && class == ContinuantClass::Typical {
        return Err(Error::Internal(format!(
            "B_{} is neither in Q_theta nor atypical although lambda_{} >= 6/(log theta - delta): {}",
            2 * k - 1,
            2 * k,
            serde_json::to_string(&out).unwrap_or_default()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e2r5() -> ThetaSpec {
        "from-cf:[0;2,period(4)]".parse().unwrap()
    }

    #[test]
    fn infinite_family_continuants_are_atypical() {
        let opts = MembershipOptions::default();
        for k in 3..=20 {
            let c = classify_continuant(&e2r5(), k, Some(RealSpec::rational(2, 1)), &opts).unwrap();
            assert!(c.lemma_applies && c.comparison.exact);
            assert_eq!(c.class, ContinuantClass::Atypical, "k = {k}");
            assert!(!c.q.unwrap().member);
        }
    }

    #[test]
    fn default_delta_is_half_log() {
        let th = e2r5();
        assert_eq!(default_delta(&th), RealSpec::QuadIrr("(0+1*sqrt(5))/1".parse().unwrap()));
        let c = classify_continuant(&th, 4, None, &MembershipOptions::default()).unwrap();
        assert_eq!(c.k0, 3);
        let two = ThetaSpec::rational(2, 1).unwrap();
        let d = default_delta(&two);
        assert!((d.ball_at(64).unwrap().to_f64() - 0.34657).abs() < 1e-4);
    }

    #[test]
    fn small_lambda_is_typical() {
        let th: ThetaSpec = "exp-quadratic:(0+1*sqrt(2))/1".parse().unwrap();
        let c = classify_continuant(&th, 5, None, &MembershipOptions::default()).unwrap();
        assert!(!c.lemma_applies);
        assert_eq!(c.class, ContinuantClass::Typical);
    }

    #[test]
    fn k_below_k0_is_rejected() {
        let tiny = RealSpec::rational(1, 1_000_000);
        let k0v = k0(&e2r5(), &tiny, &RefinePolicy::default()).unwrap();
        assert!(k0v > 3);
        let err = classify_continuant(&e2r5(), 3, Some(tiny), &MembershipOptions::default()).unwrap_err();
        assert!(err.to_string().contains(&format!("k0 = {k0v}")));
    }

    #[test]
    fn rejects_out_of_range() {
        let th = ThetaSpec::exp_quadratic("(0+5*sqrt(2))/1".parse().unwrap()).unwrap();
        assert!(matches!(
            classify_continuant(&th, 3, None, &MembershipOptions::default()),
            Err(Error::Unsupported(_))
        ));
        assert!(classify_continuant(&e2r5(), 3, Some(RealSpec::rational(5, 1)), &MembershipOptions::default()).is_err());
    }
}
