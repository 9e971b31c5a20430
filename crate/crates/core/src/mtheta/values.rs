//! `M'_theta(n)`, `M_theta(n)` and the typical value.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{half, ThetaContext, ThetaSpec};
use crate::error::{Error, Result};
use crate::realnum::{
    exp_ball, expm1_ball, floor_certified, Ball, FloorDecision, QuadIrr, RealSpec, RefinePolicy,
};

fn exact_root(x: &BigInt, m: u32) -> Option<BigInt> {
    let r = x.nth_root(m);
    (num_traits::pow(r.clone(), m as usize) == *x).then_some(r)
}

/// `r^(1/m)` when it is rational.
pub(crate) fn rational_root(r: &BigRational, m: &BigInt) -> Option<BigRational> {
    if m.is_one() {
        return Some(r.clone());
    }
    // a nontrivial m-th power has at least m bits
    let limit = r.numer().bits().max(r.denom().bits());
    if *m > BigInt::from(limit) {
        return None;
    }
    let m = m.to_u32()?;
    Some(BigRational::new(
        exact_root(r.numer(), m)?,
        exact_root(r.denom(), m)?,
    ))
}

/// `theta^(1/n)` in exact form when `theta` is rational and the root is
/// rational or quadratic.
pub(crate) fn exact_root_of_theta(theta: &ThetaSpec, n: &BigInt) -> Option<QuadIrr> {
    let r = theta.rational_value()?;
    let m = n.abs();
    let r = if n.is_negative() { r.recip() } else { r.clone() };
    if let Some(rho) = rational_root(&r, &m) {
        return Some(QuadIrr::from_rational(&rho));
    }
    if m == BigInt::from(2) {
        return QuadIrr::sqrt_rational(&r).ok();
    }
    None
}

/// Encloses `1/(theta^(1/n) - 1)` at working precision `w`.
pub(crate) fn m_prime_ball_at(ctx: &ThetaContext, n: &BigInt, w: u64) -> Option<Ball> {
    let lb = ctx.log_balls(w);
    let wp = w + 16;
    let t = lb.log.div(&Ball::from_int(n.clone()), wp)?;
    expm1_ball(&t, wp).recip(w)
}

pub(crate) fn m_prime_with(ctx: &ThetaContext, n: &BigInt) -> Result<FloorDecision> {
    if n.is_zero() {
        return Err(Error::input("M'_theta(n) needs n != 0"));
    }
    if let Some(rho) = exact_root_of_theta(ctx.theta(), n) {
        let v = rho.add_rational(&-BigRational::one()).recip()?;
        return floor_certified(&RealSpec::QuadIrr(v), ctx.policy());
    }
    for w in ctx.policy().precisions() {
        if let Some(v) = m_prime_ball_at(ctx, n, w) {
            if let Some(f) = v.floor_strict() {
                return Ok(FloorDecision::Decided {
                    value: f,
                    witness: Some(v),
                    precision_bits: Some(w),
                    exact: None,
                });
            }
        }
    }
    Ok(FloorDecision::Undecided {
        precision_cap_bits: ctx.policy().cap_bits,
    })
}

/// `M'_theta(n) = floor(1/(theta^(1/n) - 1))` with its certificate.
pub fn m_prime_decision(theta: &ThetaSpec, n: &BigInt, policy: &RefinePolicy) -> Result<FloorDecision> {
    m_prime_with(&ThetaContext::new(theta.clone(), *policy), n)
}

fn decided(d: FloorDecision, what: impl FnOnce() -> String) -> Result<BigInt> {
    match d {
        FloorDecision::Undecided { precision_cap_bits } => {
            Err(Error::undecided(precision_cap_bits, what()))
        }
        other => Ok(other.value().expect("decided").clone()),
    }
}

/// `M'_theta(n)` for `n != 0`.
pub fn m_prime(theta: &ThetaSpec, n: &BigInt, policy: &RefinePolicy) -> Result<BigInt> {
    let d = m_prime_decision(theta, n, policy)?;
    decided(d, || format!("1/(theta^(1/{n}) - 1) for theta = {theta} is too close to an integer"))
}

/// Encloses `n/log theta - 1/2` at working precision `w`.
pub(crate) fn typical_ball_at(ctx: &ThetaContext, n: &BigInt, w: u64) -> Ball {
    let lb = ctx.log_balls_for(n, w);
    lb.recip.mul_int(n, lb.prec).sub(&half(), lb.prec)
}

pub(crate) fn typical_with(ctx: &ThetaContext, n: &BigInt) -> Result<FloorDecision> {
    let mult = BigRational::from_integer(n.clone());
    if let Some(q) = ctx.theta().recip_log_exact(&mult) {
        let v = q.add_rational(&BigRational::new((-1).into(), 2.into()));
        return floor_certified(&RealSpec::QuadIrr(v), ctx.policy());
    }
    for w in ctx.policy().precisions() {
        let b = typical_ball_at(ctx, n, w);
        if let Some(f) = b.floor_strict() {
            return Ok(FloorDecision::Decided {
                value: f,
                witness: Some(b),
                precision_bits: Some(w),
                exact: None,
            });
        }
    }
    Ok(FloorDecision::Undecided {
        precision_cap_bits: ctx.policy().cap_bits,
    })
}

impl ThetaContext {
    /// `M'_theta(n)` with its certificate, using the cached enclosures.
    pub fn m_prime_decision(&self, n: &BigInt) -> Result<FloorDecision> {
        m_prime_with(self, n)
    }

    /// `M'_theta(n)` with the cached enclosures.
    pub fn m_prime(&self, n: &BigInt) -> Result<BigInt> {
        decided(m_prime_with(self, n)?, || format!("M'_theta({n}) for theta = {}", self.theta()))
    }

    /// `floor(n/log theta - 1/2)` with the cached enclosures.
    pub fn typical(&self, n: &BigInt) -> Result<BigInt> {
        decided(typical_with(self, n)?, || format!("typical value at {n} for theta = {}", self.theta()))
    }
}

/// `floor(n/log theta - 1/2)`.
pub fn typical_value(theta: &ThetaSpec, n: &BigInt, policy: &RefinePolicy) -> Result<BigInt> {
    let d = typical_with(&ThetaContext::new(theta.clone(), *policy), n)?;
    decided(d, || format!("{n}/log theta - 1/2 for theta = {theta} is too close to an integer"))
}

/// `M_theta(n) = floor(1/{theta^(1/n)})` for `n >= 1`.
pub fn m_theta(theta: &ThetaSpec, n: &BigInt, policy: &RefinePolicy) -> Result<BigInt> {
    if !n.is_positive() {
        return Err(Error::input("M_theta(n) needs n >= 1"));
    }
    if theta.n_exceeds_log2(n, policy)? {
        return m_prime(theta, n, policy);
    }
    if let Some(rho) = exact_root_of_theta(theta, n) {
        let frac = rho.add_rational(&-BigRational::from_integer(rho.floor()));
        if frac.signum() == 0 {
            return Err(Error::Domain(format!(
                "theta = {theta} is a perfect {n}-th power, so {{theta^(1/{n})}} = 0"
            )));
        }
        return Ok(frac.recip()?.floor());
    }
    for w in policy.precisions() {
        let wp = w + 16;
        let t = theta.log_ball(wp).div(&Ball::from_int(n.clone()), wp).expect("n > 0");
        let rho = exp_ball(&t, w);
        let Some((_, fr)) = rho.frac() else { continue };
        let Some(inv) = fr.recip(w) else { continue };
        if let Some(v) = inv.floor_strict() {
            return Ok(v);
        }
    }
    Err(Error::undecided(
        policy.cap_bits,
        format!("1/{{theta^(1/{n})}} for theta = {theta}"),
    ))
}
