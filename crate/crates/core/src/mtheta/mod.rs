//! `f(t)`, `M_theta(n)`, `M'_theta(n)`, the typical value, and certified
//! membership in the atypical set.

mod membership;
pub mod theta;
mod values;

use std::sync::OnceLock;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::realnum::{expm1_ball, Ball, Dyadic, RealSpec, RefinePolicy};

pub use membership::{
    is_atypical, replay_membership, MembershipOptions, MembershipResult, Via, Witness,
};
pub use theta::{LogTheta, ThetaKind, ThetaSpec};
pub use values::{m_prime, m_prime_decision, m_theta, typical_value};

/// Guard bits kept on the cached `log theta` enclosures.
const CACHE_GUARD: u64 = 256;

#[derive(Clone, Debug)]
pub(crate) struct LogBalls {
    pub log: Ball,
    pub recip: Ball,
    pub prec: u64,
}

/// A `theta` with its `log theta` and `1/log theta` enclosures cached per
/// working precision, for bulk evaluation over many `n`.
#[derive(Debug)]
pub struct ThetaContext {
    theta: ThetaSpec,
    policy: RefinePolicy,
    schedule: Vec<u64>,
    cache: Vec<OnceLock<LogBalls>>,
}

impl ThetaContext {
    pub fn new(theta: ThetaSpec, policy: RefinePolicy) -> Self {
        let schedule: Vec<u64> = policy.precisions().collect();
        let cache = schedule.iter().map(|_| OnceLock::new()).collect();
        ThetaContext {
            theta,
            policy,
            schedule,
            cache,
        }
    }

    pub fn theta(&self) -> &ThetaSpec {
        &self.theta
    }

    pub fn policy(&self) -> &RefinePolicy {
        &self.policy
    }

    fn compute(&self, w: u64) -> LogBalls {
        let prec = w + CACHE_GUARD;
        let log = self.theta.log_ball(prec);
        let recip = log.recip(prec).expect("log theta > 0");
        LogBalls { log, recip, prec }
    }

    /// Enclosures of `log theta` and its reciprocal with `CACHE_GUARD`
    /// extra bits over `w`. Identical whether or not they came from the cache.
    pub(crate) fn log_balls(&self, w: u64) -> LogBalls {
        match self.schedule.iter().position(|&p| p == w) {
            Some(i) => self.cache[i].get_or_init(|| self.compute(w)).clone(),
            None => self.compute(w),
        }
    }

    /// Enclosures good for `n`: at least `2 bits(n)` bits beyond `w`.
    pub(crate) fn log_balls_for(&self, n: &BigInt, w: u64) -> LogBalls {
        let need = w + 2 * n.bits() + 64;
        if need <= w + CACHE_GUARD {
            self.log_balls(w)
        } else {
            let log = self.theta.log_ball(need);
            let recip = log.recip(need).expect("log theta > 0");
            LogBalls {
                log,
                recip,
                prec: need,
            }
        }
    }
}

pub(crate) fn half() -> Ball {
    Ball::exact(Dyadic::new(1.into(), -1))
}

/// `f(t) = 1/(e^t - 1) - 1/t + 1/2` on a positive ball.
///
/// `t` should carry about `w + 2 log2(1/t)` bits: the two reciprocals
/// cancel to leave a value near `t/12`.
pub(crate) fn f_ball(t: &Ball, w: u64) -> Option<Ball> {
    if !t.is_positive() {
        return None;
    }
    let extra = (2 * (-t.lo().magnitude()).max(0)) as u64 + 16;
    let wp = w + extra;
    let e = expm1_ball(t, wp);
    let a = e.recip(wp)?;
    let b = t.recip(wp)?;
    Some(a.sub(&b, wp).add(&half(), w))
}

/// Encloses `f(t)` for `t > 0`.
pub fn f_eval(t: &RealSpec, p: u64) -> Result<Ball> {
    t.validate()?;
    let probe = t.ball_at(64)?;
    if !probe.is_positive() {
        // a wide probe may straddle zero for tiny t; retry before rejecting
        let fine = t.ball_at(p.max(64) * 4)?;
        if !fine.is_positive() {
            return Err(Error::input("f(t) needs t > 0"));
        }
    }
    let mut prec = p.max(16);
    loop {
        let tb = t.ball_at(prec + 64)?;
        let extra = if tb.is_positive() {
            (2 * (-tb.lo().magnitude()).max(0)) as u64
        } else {
            prec
        };
        let tb = t.ball_at(prec + extra + 64)?;
        if let Some(f) = f_ball(&tb, prec + 8) {
            if f.width_within(p as i64) {
                return Ok(f);
            }
        }
        prec *= 2;
        if prec > 1 << 20 {
            return Err(Error::Internal("f(t) enclosure failed to converge".into()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn f_at_one() {
        let f = f_eval(&RealSpec::rational(1, 1), 100).unwrap();
        assert!((f.to_f64() - 0.081977).abs() < 1e-6);
        let lo = Ball::from_rational(&rat(59, 720), 100);
        let hi = Ball::from_rational(&rat(1, 12), 100);
        assert!(lo.lt(&f) && f.lt(&hi));
    }

    #[test]
    fn f_tends_to_zero() {
        let mut prev = f64::INFINITY;
        for j in 5..=20 {
            let t = RealSpec::Rational(rat(1, 1 << j));
            let f = f_eval(&t, 80).unwrap();
            assert!(f.is_positive());
            assert!(f.width_within(80));
            assert!(f.to_f64() < prev);
            prev = f.to_f64();
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn f_sandwich_at_half() {
        let t = rat(1, 2);
        let f = f_eval(&RealSpec::Rational(t.clone()), 80).unwrap();
        let upper = &t / BigRational::from_integer(12.into());
        let lower = &upper - &t * &t * &t / BigRational::from_integer(720.into());
        assert!(Ball::from_rational(&lower, 90).lt(&f));
        assert!(f.lt(&Ball::from_rational(&upper, 90)));
    }

    #[test]
    fn context_cache_is_transparent() {
        let th = ThetaSpec::rational(2, 1).unwrap();
        let ctx = ThetaContext::new(th.clone(), RefinePolicy::default());
        let a = ctx.log_balls(128);
        let b = ctx.log_balls(128);
        assert_eq!(a.log, b.log);
        assert_eq!(a.log, th.log_ball(128 + CACHE_GUARD));
    }
}
