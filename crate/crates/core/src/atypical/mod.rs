//! Enumeration and classification of the atypical set: a direct scan, the
//! continuant enumerator, good denominators `Q_theta`, the rational-log
//! bound, and the continuant classifier.

mod classify;
mod qset;
mod report;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;

use crate::contfrac::{expansion_past, CFExpansion, ExpansionKind};
use crate::error::{Error, Result};
use crate::mtheta::{MembershipOptions, MembershipResult, ThetaContext, ThetaKind, ThetaSpec};
use crate::realnum::{Ball, QuadIrr, RealSpec, RefinePolicy};

pub use classify::{classify_continuant, default_delta, k0, Classification, ContinuantClass};
pub use qset::{q_set_membership, QMembership};
pub use report::{
    replay_certificate, replay_report, AtypicalCertificate, CandidateRecord, Decomposition,
    EnumerationMethod, EnumerationReport, FilterOutcome, LambdaComparison, REPORT_SCHEMA,
};

/// Options shared by the enumerators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EnumerationOptions {
    pub membership: MembershipOptions,
}

impl EnumerationOptions {
    pub fn policy(&self) -> &RefinePolicy {
        &self.membership.policy
    }
}

/// The right-hand side of a `lambda_k` comparison.
#[derive(Clone, Debug)]
pub(crate) enum Threshold {
    /// `scale / log theta`.
    OverLog { theta: ThetaSpec, scale: BigRational },
    /// `scale / (log theta - delta)`.
    OverLogMinus {
        theta: ThetaSpec,
        scale: BigRational,
        delta: RealSpec,
    },
    Rational(BigRational),
}

impl Threshold {
    fn exact(&self) -> Option<QuadIrr> {
        match self {
            Threshold::OverLog { theta, scale } => theta.recip_log_exact(scale),
            Threshold::OverLogMinus { theta, scale, delta } => {
                let l = theta.recip_log_exact(&BigRational::one())?.recip().ok()?;
                let d = delta.exact()?.to_quad();
                l.sub(&d).ok()?.recip().ok().map(|v| v.mul_rational(scale))
            }
            Threshold::Rational(r) => Some(QuadIrr::from_rational(r)),
        }
    }

    fn ball(&self, w: u64) -> Result<Ball> {
        let wp = w + 16;
        match self {
            Threshold::OverLog { theta, scale } => Ok(Ball::from_rational(scale, wp)
                .div(&theta.log_ball(wp), w)
                .expect("log theta > 0")),
            Threshold::OverLogMinus { theta, scale, delta } => {
                let den = theta.log_ball(wp).sub(&delta.ball_at(wp)?, wp);
                Ball::from_rational(scale, wp)
                    .div(&den, w)
                    .ok_or_else(|| Error::undecided(w, "log theta - delta straddles zero"))
            }
            Threshold::Rational(r) => Ok(Ball::from_rational(r, w)),
        }
    }
}

/// Certified `lambda_k` against a threshold: exact when both live in one
/// quadratic field, otherwise by refinement.
pub(crate) fn compare_lambda(
    cf: &CFExpansion,
    k: usize,
    thr: &Threshold,
    policy: &RefinePolicy,
) -> Result<LambdaComparison> {
    if cf.kind() == ExpansionKind::Periodic {
        if let Some(t) = thr.exact() {
            let lam = cf.lambda(k, 64)?;
            let e = lam.exact.as_ref().expect("periodic lambda is exact");
            if let Ok(diff) = e.sub(&t) {
                let s = diff.signum();
                return Ok(LambdaComparison {
                    k,
                    lambda: lam.ball,
                    threshold: t.to_ball(64),
                    exceeds: Some(s > 0),
                    equal: s == 0,
                    precision_bits: None,
                    exact: true,
                    coarse: false,
                });
            }
        }
    }
    let mut last = None;
    for w in policy.precisions() {
        let c = compare_lambda_at(cf, k, thr, w)?;
        if c.exceeds.is_some() {
            return Ok(c);
        }
        last = Some(c);
    }
    Ok(last.expect("nonempty schedule"))
}

/// One refinement step of [`compare_lambda`] at working precision `w`.
pub(crate) fn compare_lambda_at(cf: &CFExpansion, k: usize, thr: &Threshold, w: u64) -> Result<LambdaComparison> {
    let lam = cf.lambda(k, w)?;
    let threshold = thr.ball(w)?;
    let exceeds = if lam.ball.gt(&threshold) {
        Some(true)
    } else if lam.ball.hi() <= threshold.lo() {
        Some(false)
    } else {
        None
    };
    Ok(LambdaComparison {
        k,
        lambda: lam.ball,
        threshold,
        exceeds,
        equal: false,
        precision_bits: Some(w),
        exact: false,
        coarse: lam.coarse,
    })
}

pub(crate) fn require_irrational_log(theta: &ThetaSpec) -> Result<()> {
    if theta.log_is_rational() {
        return Err(Error::Unsupported(format!(
            "log theta is rational for {theta}; use the rational bound and a direct scan"
        )));
    }
    Ok(())
}

/// Expansion of `m / log theta` with certified terms two past the first
/// continuant above `bound`.
pub(crate) fn recip_log_expansion(
    theta: &ThetaSpec,
    m: i64,
    bound: &BigInt,
    policy: &RefinePolicy,
) -> Result<CFExpansion> {
    expansion_past(&RealSpec::recip_log(theta.clone(), m), bound, 2, policy)
}

/// Applies the membership test to every `n` in `[1, limit]`.
pub fn scan_direct(theta: &ThetaSpec, limit: u64, opts: &EnumerationOptions) -> Result<EnumerationReport> {
    if limit == 0 {
        return Err(Error::input("scan limit must be at least 1"));
    }
    let ctx = ThetaContext::new(theta.clone(), opts.membership.policy);
    let paranoid = opts.membership.paranoid;
    let hits: Vec<(u64, Result<MembershipResult>)> = (1..=limit)
        .into_par_iter()
        .filter_map(|n| {
            let r = ctx.is_atypical(&BigInt::from(n), paranoid);
            match &r {
                Ok(m) if !m.atypical => None,
                _ => Some((n, r)),
            }
        })
        .collect();
    let mut report = EnumerationReport::new(theta, BigInt::from(limit), EnumerationMethod::Direct);
    report.candidates_examined = limit;
    for (n, r) in hits {
        match r {
            Ok(m) => report.push_member(None, m),
            Err(e) if e.is_undecided() => report.undecided.push(BigInt::from(n)),
            Err(e) => return Err(e),
        }
    }
    report.finish();
    Ok(report)
}

/// Members of `A_theta` in `[1, limit]` from the odd continuants of
/// `2/log theta`, for `1 < theta < e^3` with irrational `log theta`.
pub fn enumerate_continuant(
    theta: &ThetaSpec,
    limit: &BigInt,
    opts: &EnumerationOptions,
) -> Result<EnumerationReport> {
    if !limit.is_positive() {
        return Err(Error::input("limit must be at least 1"));
    }
    require_irrational_log(theta)?;
    let policy = opts.policy();
    if !theta.lt_exp(3, policy)? {
        return Err(Error::Unsupported(format!(
            "{theta} is not below e^3; the continuant enumerator does not apply, use a direct scan"
        )));
    }
    let cf = recip_log_expansion(theta, 2, limit, policy)?;
    let ctx = ThetaContext::new(theta.clone(), *policy);
    let mut report = EnumerationReport::new(theta, limit.clone(), EnumerationMethod::Continuant);
    report.expansion = Some(cf.terms().clone());
    let known = cf.known_len();
    for k in 1.. {
        let idx = 2 * k - 1;
        if known.is_some_and(|l| idx >= l) {
            report.complete = false;
            report.notes.push(format!(
                "expansion certified only to index {}; B_{idx} and beyond not examined",
                known.unwrap() - 1
            ));
            break;
        }
        let b = cf.convergent(idx)?.den;
        if &b > limit {
            break;
        }
        let mut c = BigInt::one();
        while &(&c * &b) <= limit {
            let n = &c * &b;
            let thr = Threshold::OverLog {
                theta: theta.clone(),
                scale: BigRational::from_integer(BigInt::from(6) * &c * &c),
            };
            let cmp = compare_lambda(&cf, 2 * k, &thr, policy)?;
            report.candidates_examined += 1;
            let outcome = match cmp.exceeds {
                Some(true) => FilterOutcome::Passed,
                Some(false) => FilterOutcome::Rejected,
                None => FilterOutcome::Undecided,
            };
            let mut rec = CandidateRecord {
                k,
                c: c.clone(),
                n: n.clone(),
                comparison: cmp.clone(),
                outcome,
                atypical: None,
            };
            if outcome == FilterOutcome::Rejected {
                report.candidates.push(rec);
                // the threshold grows with c
                break;
            }
            match ctx.is_atypical(&n, opts.membership.paranoid) {
                Ok(m) => {
                    rec.atypical = Some(m.atypical);
                    if m.atypical {
                        let d = Decomposition {
                            c: c.clone(),
                            k,
                            comparison: cmp,
                        };
                        report.push_member(Some(d), m);
                    }
                }
                Err(e) if e.is_undecided() => report.undecided.push(n.clone()),
                Err(e) => return Err(e),
            }
            report.candidates.push(rec);
            c += 1;
        }
    }
    report.finish();
    Ok(report)
}

/// Runs both enumerators on `[1, limit]` and requires identical members.
pub fn enumerate_both(theta: &ThetaSpec, limit: u64, opts: &EnumerationOptions) -> Result<EnumerationReport> {
    let direct = scan_direct(theta, limit, opts)?;
    let mut out = enumerate_continuant(theta, &BigInt::from(limit), opts)?;
    if direct.members != out.members {
        return Err(Error::Internal(format!(
            "direct scan {:?} and continuant enumeration {:?} disagree for {theta}",
            direct.members.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
            out.members.iter().map(|m| m.to_string()).collect::<Vec<_>>()
        )));
    }
    out.method = EnumerationMethod::Both;
    out.candidates_examined += direct.candidates_examined;
    out.complete &= direct.complete;
    out.undecided.extend(direct.undecided);
    out.finish();
    Ok(out)
}

/// `p^2 / (6q)`: no `n >= p^2/(6q)` is atypical when `log theta = p/q > 1`.
pub fn rational_bound(p: &BigInt, q: &BigInt) -> Result<BigRational> {
    if !p.is_positive() || !q.is_positive() {
        return Err(Error::input("p and q must be positive"));
    }
    if p <= q {
        return Err(Error::input(format!("need p/q > 1, got {p}/{q}")));
    }
    Ok(BigRational::new(p * p, BigInt::from(6) * q))
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RationalBoundReport {
    pub theta: ThetaSpec,
    /// `p^2/(6q)` as `num/den`.
    pub bound: String,
    pub scan_limit: u64,
    #[serde(with = "crate::serde_big::vec")]
    pub members: Vec<BigInt>,
    #[serde(with = "crate::serde_big::vec")]
    pub violations: Vec<BigInt>,
    pub complete: bool,
    pub pass: bool,
}

/// Scans `[1, ceil(bound) + margin]` for `theta = e^(p/q)` and checks that
/// no member reaches the bound.
pub fn verify_rational_bound(
    p: &BigInt,
    q: &BigInt,
    margin: u64,
    opts: &EnumerationOptions,
) -> Result<RationalBoundReport> {
    let bound = rational_bound(p, q)?;
    let theta = ThetaSpec::new(ThetaKind::ExpRational(BigRational::new(p.clone(), q.clone())))?;
    let scan_limit = bound
        .ceil()
        .to_integer()
        .to_u64()
        .and_then(|c| c.checked_add(margin))
        .ok_or_else(|| Error::input("bound too large to scan"))?
        .max(1);
    let rep = scan_direct(&theta, scan_limit, opts)?;
    let violations: Vec<BigInt> = rep
        .members
        .iter()
        .filter(|m| BigRational::from_integer((*m).clone()) >= bound)
        .cloned()
        .collect();
    Ok(RationalBoundReport {
        theta,
        bound: format!("{}/{}", bound.numer(), bound.denom()),
        scan_limit,
        pass: violations.is_empty() && rep.complete,
        complete: rep.complete,
        members: rep.members,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> EnumerationOptions {
        EnumerationOptions::default()
    }

    fn big(v: i64) -> BigInt {
        v.into()
    }

    fn root2() -> ThetaSpec {
        "exp-quadratic:(0+1*sqrt(2))/1".parse().unwrap()
    }

    #[test]
    fn scan_examples() {
        let two = ThetaSpec::rational(2, 1).unwrap();
        assert_eq!(scan_direct(&two, 100, &quick()).unwrap().members, vec![big(1)]);
        assert!(scan_direct(&root2(), 1000, &quick()).unwrap().members.is_empty());
        let e3 = ThetaSpec::exp_rational(3, 1).unwrap();
        assert_eq!(scan_direct(&e3, 10, &quick()).unwrap().members, vec![big(1)]);
    }

    #[test]
    fn log2_continuants() {
        let two = ThetaSpec::rational(2, 1).unwrap();
        let limit = BigInt::from(10u64.pow(15));
        let r = enumerate_continuant(&two, &limit, &quick()).unwrap();
        assert_eq!(r.members, vec![big(1), BigInt::from(777451915729368u64)]);
        assert!(r.complete && r.undecided.is_empty());
        let passed: Vec<usize> = r
            .candidates
            .iter()
            .filter(|c| c.outcome == FilterOutcome::Passed)
            .map(|c| c.k)
            .collect();
        assert_eq!(passed, vec![1, 18]);
        assert!(r
            .candidates
            .iter()
            .all(|c| c.c == big(1) || c.outcome == FilterOutcome::Rejected));
        // k = 1..17 give lambda_2..lambda_34, of which only lambda_2 passes
        let l2 = &r.candidates[0].comparison;
        assert!(l2.lambda.to_f64() > 8.65 && l2.lambda.to_f64() < 8.73);
        assert!(replay_report(&r).unwrap());
    }

    #[test]
    fn root2_has_no_candidates() {
        let r = enumerate_continuant(&root2(), &BigInt::from(10u64.pow(12)), &quick()).unwrap();
        assert!(r.members.is_empty());
        assert!(r.candidates.iter().all(|c| c.outcome == FilterOutcome::Rejected && c.comparison.exact));
    }

    #[test]
    fn enumerator_rejects_large_theta() {
        let th = ThetaSpec::exp_quadratic("(0+2*sqrt(3))/1".parse().unwrap()).unwrap();
        assert!(matches!(
            enumerate_continuant(&th, &big(100), &quick()),
            Err(Error::Unsupported(_))
        ));
        let e2 = ThetaSpec::exp_rational(2, 1).unwrap();
        assert!(matches!(
            enumerate_continuant(&e2, &big(100), &quick()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn both_methods_agree() {
        for s in ["exp-quadratic:(1+1*sqrt(3))/2", "rational:3/1", "rational:7/5"] {
            let th: ThetaSpec = s.parse().unwrap();
            let r = enumerate_both(&th, 3000, &quick()).unwrap();
            assert_eq!(r.method, EnumerationMethod::Both);
            assert!(r.complete);
        }
    }

    #[test]
    fn rational_log_bound_examples() {
        let r = verify_rational_bound(&big(3), &big(1), 100, &quick()).unwrap();
        assert!(r.pass);
        assert_eq!(r.members, vec![big(1)]);
        let r = verify_rational_bound(&big(10), &big(1), 983, &quick()).unwrap();
        assert!(r.pass && r.members.iter().all(|m| *m < big(17)));
        assert!(verify_rational_bound(&big(2), &big(1), 100, &quick()).unwrap().pass);
        assert!(rational_bound(&big(1), &big(1)).is_err());
        assert_eq!(rational_bound(&big(3), &big(1)).unwrap(), BigRational::new(3.into(), 2.into()));
    }
}
