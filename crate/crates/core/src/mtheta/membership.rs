//! Certified membership `n in A_theta` through the fractional-part windows.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use super::values::{exact_root_of_theta, m_prime_with, typical_with};
use super::{f_ball, half, ThetaContext, ThetaSpec};
use crate::error::{Error, Result};
use crate::realnum::{Ball, FloorDecision, RefinePolicy};

/// Which argument decided membership.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Via {
    /// `{n/log theta}` in `[1/2 - f(log theta/n), 1/2)`.
    FirstEquiv,
    /// `{2n/log theta} >= 1 - 2f` and `{n/log theta} < 1 - f`.
    SecondEquiv,
    /// Exact arithmetic: a rational `n/log theta` or an exact integer `M'`.
    ExactRational,
    /// `M'_theta(n)` compared with the typical value.
    Direct,
}

/// One certified inequality `lhs relation rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub name: String,
    pub lhs: Ball,
    pub relation: String,
    pub rhs: Ball,
}

impl Witness {
    fn new(name: &str, lhs: &Ball, relation: &str, rhs: &Ball) -> Self {
        Witness {
            name: name.to_string(),
            lhs: lhs.clone(),
            relation: relation.to_string(),
            rhs: rhs.clone(),
        }
    }

    /// Re-checks the inequality on the stored balls.
    pub fn holds(&self) -> bool {
        match self.relation.as_str() {
            "<" => self.lhs.lt(&self.rhs),
            ">=" => self.lhs.lo() >= self.rhs.hi(),
            "=" => self.lhs == self.rhs,
            "!=" => !self.lhs.overlaps(&self.rhs) || (self.lhs.is_exact() && self.rhs.is_exact() && self.lhs != self.rhs),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipResult {
    pub atypical: bool,
    #[serde(with = "crate::serde_big")]
    pub n: BigInt,
    pub via: Via,
    pub precision_bits: Option<u64>,
    pub witnesses: Vec<Witness>,
    /// Both window lemmas and the direct comparison were run and agreed.
    pub cross_checked: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipOptions {
    pub policy: RefinePolicy,
    /// Recompute through the second window and `M'` directly and require
    /// agreement.
    pub paranoid: bool,
}

impl MembershipOptions {
    pub fn paranoid() -> Self {
        MembershipOptions {
            paranoid: true,
            ..Default::default()
        }
    }
}

/// Outcome of one evaluation at a fixed working precision.
pub(crate) enum Step {
    Decided(bool, Vec<Witness>),
    Straddle(&'static str),
}

fn dy_ball(r: &BigRational, w: u64) -> Ball {
    Ball::from_rational(r, w)
}

/// `{n/log theta}` and `log theta/n` at working precision `w`.
fn frac_and_t(ctx: &ThetaContext, n: &BigInt, mult: u32, w: u64) -> Option<(Ball, Ball)> {
    let lb = ctx.log_balls_for(n, w);
    let x = lb.recip.mul_int(&(n * mult), lb.prec);
    let (_, fr) = x.frac()?;
    let t = lb.log.div(&Ball::from_int(n.clone()), lb.prec)?;
    Some((fr, t))
}

/// Exact `{m n / log theta}` when `log theta` is rational.
fn exact_frac(ctx: &ThetaContext, n: &BigInt, mult: u32) -> Option<BigRational> {
    let q = ctx
        .theta()
        .recip_log_exact(&BigRational::from_integer(n * mult))?;
    let r = q.as_rational()?;
    Some(&r - BigRational::from_integer(r.floor().to_integer()))
}

/// The first window test at working precision `w`.
pub(crate) fn first_equiv_at(ctx: &ThetaContext, n: &BigInt, w: u64) -> Step {
    let h = half();
    let exact = exact_frac(ctx, n, 1);
    let (fr, t) = match &exact {
        Some(e) => {
            let lb = ctx.log_balls_for(n, w);
            let t = lb.log.div(&Ball::from_int(n.clone()), lb.prec).expect("n > 0");
            (dy_ball(e, w + 64), t)
        }
        None => match frac_and_t(ctx, n, 1, w) {
            Some(v) => v,
            None => return Step::Straddle("n/log theta near an integer"),
        },
    };
    // right end of the window: {x} < 1/2
    let below_half = match &exact {
        Some(e) => Some(*e < BigRational::new(1.into(), 2.into())),
        None if fr.lo() >= h.lo() => Some(false),
        None if fr.hi() < h.lo() => Some(true),
        None => None,
    };
    match below_half {
        Some(false) => {
            return Step::Decided(false, vec![Witness::new("{x} >= 1/2", &fr, ">=", &h)]);
        }
        None => return Step::Straddle("{n/log theta} near 1/2"),
        Some(true) => {}
    }
    // f(t) < t/12 gives a cheap rejection far from the window
    let t12 = t.mul_rational(&BigRational::new(1.into(), 12.into()), w + 16);
    let quick = h.sub(&t12, w + 16);
    if fr.lt(&quick) {
        return Step::Decided(false, vec![Witness::new("{x} < 1/2 - t/12 < 1/2 - f(t)", &fr, "<", &quick)]);
    }
    let Some(f) = f_ball(&t, w) else {
        return Step::Straddle("f(log theta/n) enclosure");
    };
    let g = h.sub(&f, w + 16);
    if fr.lo() >= g.hi() {
        Step::Decided(
            true,
            vec![
                Witness::new("{x} < 1/2", &fr, "<", &h),
                Witness::new("{x} >= 1/2 - f(t)", &fr, ">=", &g),
            ],
        )
    } else if fr.lt(&g) {
        Step::Decided(false, vec![Witness::new("{x} < 1/2 - f(t)", &fr, "<", &g)])
    } else {
        Step::Straddle("{n/log theta} near 1/2 - f(log theta/n)")
    }
}

/// The second window test at working precision `w`.
pub(crate) fn second_equiv_at(ctx: &ThetaContext, n: &BigInt, w: u64) -> Step {
    let one = Ball::one();
    let (f1, f2, t) = match (exact_frac(ctx, n, 1), exact_frac(ctx, n, 2)) {
        (Some(a), Some(b)) => {
            let lb = ctx.log_balls_for(n, w);
            let t = lb.log.div(&Ball::from_int(n.clone()), lb.prec).expect("n > 0");
            (dy_ball(&a, w + 64), dy_ball(&b, w + 64), t)
        }
        _ => {
            let Some((f1, t)) = frac_and_t(ctx, n, 1, w) else {
                return Step::Straddle("n/log theta near an integer");
            };
            let Some((f2, _)) = frac_and_t(ctx, n, 2, w) else {
                return Step::Straddle("2n/log theta near an integer");
            };
            (f1, f2, t)
        }
    };
    let Some(f) = f_ball(&t, w) else {
        return Step::Straddle("f(log theta/n) enclosure");
    };
    let lhs_bound = one.sub(&f.shl(1), w + 16);
    let c1 = if f2.lo() >= lhs_bound.hi() {
        Some(true)
    } else if f2.lt(&lhs_bound) {
        Some(false)
    } else {
        None
    };
    let w1 = |ok: bool| {
        if ok {
            Witness::new("{2x} >= 1 - 2f(t)", &f2, ">=", &lhs_bound)
        } else {
            Witness::new("{2x} < 1 - 2f(t)", &f2, "<", &lhs_bound)
        }
    };
    match c1 {
        None => return Step::Straddle("{2n/log theta} near 1 - 2f"),
        Some(false) => return Step::Decided(false, vec![w1(false)]),
        Some(true) => {}
    }
    let rhs_bound = one.sub(&f, w + 16);
    if f1.lt(&rhs_bound) {
        Step::Decided(
            true,
            vec![w1(true), Witness::new("{x} < 1 - f(t)", &f1, "<", &rhs_bound)],
        )
    } else if f1.lo() >= rhs_bound.hi() {
        Step::Decided(
            false,
            vec![w1(true), Witness::new("{x} >= 1 - f(t)", &f1, ">=", &rhs_bound)],
        )
    } else {
        Step::Straddle("{n/log theta} near 1 - f")
    }
}

/// `M'_theta(n)` is an exact integer `s` when `theta = ((s+1)/s)^n`.
fn exact_hit(ctx: &ThetaContext, n: &BigInt) -> Option<BigInt> {
    let rho = exact_root_of_theta(ctx.theta(), n)?.as_rational()?;
    let v = (rho - BigRational::one()).recip();
    v.is_integer().then(|| v.to_integer())
}

fn run_window(
    ctx: &ThetaContext,
    n: &BigInt,
    via: Via,
    step: fn(&ThetaContext, &BigInt, u64) -> Step,
) -> Result<MembershipResult> {
    let mut last = "";
    for w in ctx.policy().precisions() {
        match step(ctx, n, w) {
            Step::Decided(atypical, witnesses) => {
                return Ok(MembershipResult {
                    atypical,
                    n: n.clone(),
                    via,
                    precision_bits: Some(w),
                    witnesses,
                    cross_checked: false,
                })
            }
            Step::Straddle(why) => last = why,
        }
    }
    Err(Error::undecided(
        ctx.policy().cap_bits,
        format!("n = {n}, theta = {}: {last}", ctx.theta()),
    ))
}

fn floor_value(d: FloorDecision, cap: u64, what: &str) -> Result<(BigInt, Option<Ball>, Option<u64>)> {
    match d {
        FloorDecision::Decided {
            value,
            witness,
            precision_bits,
            ..
        } => Ok((value, witness, precision_bits)),
        FloorDecision::ExactInteger { value, .. } => Ok((value, None, None)),
        FloorDecision::Undecided { .. } => Err(Error::undecided(cap, what.to_string())),
    }
}

fn direct(ctx: &ThetaContext, n: &BigInt) -> Result<MembershipResult> {
    let cap = ctx.policy().cap_bits;
    let (mp, mw, mprec) = floor_value(m_prime_with(ctx, n)?, cap, "M'_theta(n)")?;
    let (ty, tw, tprec) = floor_value(typical_with(ctx, n)?, cap, "n/log theta - 1/2")?;
    let ball_or = |b: Option<Ball>, v: &BigInt| b.unwrap_or_else(|| Ball::from_int(v.clone()));
    Ok(MembershipResult {
        atypical: mp != ty,
        n: n.clone(),
        via: Via::Direct,
        precision_bits: mprec.max(tprec),
        witnesses: vec![Witness::new(
            if mp != ty { "M' != typical" } else { "M' = typical" },
            &ball_or(mw, &mp),
            if mp != ty { "!=" } else { "=" },
            &ball_or(tw, &ty),
        )],
        cross_checked: false,
    })
}

impl ThetaContext {
    /// Decides `n in A_theta`.
    pub fn is_atypical(&self, n: &BigInt, paranoid: bool) -> Result<MembershipResult> {
        if !n.is_positive() {
            return Err(Error::input("membership is defined for n >= 1"));
        }
        let primary = if let Some(s) = exact_hit(self, n) {
            let (ty, tw, tprec) = floor_value(
                typical_with(self, n)?,
                self.policy().cap_bits,
                "n/log theta - 1/2",
            )?;
            MembershipResult {
                atypical: s != ty,
                n: n.clone(),
                via: Via::ExactRational,
                precision_bits: tprec,
                witnesses: vec![Witness::new(
                    "M' exact integer vs typical",
                    &Ball::from_int(s.clone()),
                    if s != ty { "!=" } else { "=" },
                    &tw.unwrap_or_else(|| Ball::from_int(ty.clone())),
                )],
                cross_checked: false,
            }
        } else {
            let mut r = run_window(self, n, Via::FirstEquiv, first_equiv_at)?;
            if r.witnesses.len() == 1
                && r.witnesses[0].name == "{x} >= 1/2"
                && self.theta().log_is_rational()
            {
                r.via = Via::ExactRational;
            }
            r
        };
        if !paranoid {
            return Ok(primary);
        }
        let second = if primary.via == Via::ExactRational && exact_hit(self, n).is_some() {
            // the window boundary is hit exactly; the second test cannot separate it
            None
        } else {
            Some(run_window(self, n, Via::SecondEquiv, second_equiv_at)?)
        };
        let third = direct(self, n)?;
        let agree = second.as_ref().is_none_or(|s| s.atypical == primary.atypical)
            && third.atypical == primary.atypical;
        if !agree {
            return Err(Error::Internal(format!(
                "membership routes disagree for n = {n}, theta = {}: first {}, second {:?}, direct {}",
                self.theta(),
                primary.atypical,
                second.map(|s| s.atypical),
                third.atypical
            )));
        }
        Ok(MembershipResult {
            cross_checked: true,
            ..primary
        })
    }
}

/// Decides `n in A_theta`, i.e. `M'_theta(n) != floor(n/log theta - 1/2)`.
pub fn is_atypical(theta: &ThetaSpec, n: &BigInt, opts: &MembershipOptions) -> Result<MembershipResult> {
    ThetaContext::new(theta.clone(), opts.policy).is_atypical(n, opts.paranoid)
}

/// Recomputes a stored decision at its recorded precision and returns
/// whether it reproduces.
pub fn replay_membership(theta: &ThetaSpec, r: &MembershipResult) -> Result<bool> {
    let ctx = ThetaContext::new(theta.clone(), RefinePolicy::default());
    let again = match (r.via, r.precision_bits) {
        (Via::FirstEquiv, Some(w)) | (Via::ExactRational, Some(w)) if exact_hit(&ctx, &r.n).is_none() => {
            first_equiv_at(&ctx, &r.n, w)
        }
        (Via::SecondEquiv, Some(w)) => second_equiv_at(&ctx, &r.n, w),
        _ => {
            let fresh = if r.via == Via::Direct {
                direct(&ctx, &r.n)?
            } else {
                ctx.is_atypical(&r.n, false)?
            };
            return Ok(fresh.atypical == r.atypical && fresh.witnesses == r.witnesses);
        }
    };
    Ok(match again {
        Step::Decided(a, w) => a == r.atypical && w == r.witnesses && w.iter().all(Witness::holds),
        Step::Straddle(_) => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> ThetaSpec {
        ThetaSpec::rational(2, 1).unwrap()
    }

    #[test]
    fn log2_endpoints() {
        let o = MembershipOptions::paranoid();
        let r1 = is_atypical(&two(), &BigInt::from(1), &o).unwrap();
        assert!(r1.atypical && r1.cross_checked);
        assert_eq!(r1.via, Via::ExactRational);
        let b35 = BigInt::from(777451915729368u64);
        let r = is_atypical(&two(), &b35, &o).unwrap();
        assert!(r.atypical && r.cross_checked);
        assert!(replay_membership(&two(), &r).unwrap());
        for n in 2..=300 {
            assert!(!is_atypical(&two(), &BigInt::from(n), &o).unwrap().atypical, "n = {n}");
        }
    }

    #[test]
    fn root2_has_no_members() {
        let th: ThetaSpec = "exp-quadratic:(0+1*sqrt(2))/1".parse().unwrap();
        let ctx = ThetaContext::new(th, RefinePolicy::default());
        for n in 1..=10_000 {
            assert!(!ctx.is_atypical(&BigInt::from(n), n <= 500).unwrap().atypical);
        }
    }

    #[test]
    fn e_cubed_n1_is_atypical() {
        let e3 = ThetaSpec::exp_rational(3, 1).unwrap();
        let r = is_atypical(&e3, &BigInt::from(1), &MembershipOptions::paranoid()).unwrap();
        assert!(r.atypical);
    }

    #[test]
    fn rational_log_half_integer_is_exact() {
        // log theta = 2: n = 1 gives n/log theta = 1/2 exactly, {x} = 1/2
        let th = ThetaSpec::exp_rational(2, 1).unwrap();
        let r = is_atypical(&th, &BigInt::from(1), &MembershipOptions::paranoid()).unwrap();
        assert!(!r.atypical);
        assert_eq!(r.via, Via::ExactRational);
    }

    #[test]
    fn witnesses_replay() {
        let th: ThetaSpec = "exp-quadratic:(0+2*sqrt(5))/1".parse().unwrap();
        for n in 1..200 {
            let r = is_atypical(&th, &BigInt::from(n), &MembershipOptions::default()).unwrap();
            assert!(r.witnesses.iter().all(Witness::holds));
            assert!(replay_membership(&th, &r).unwrap());
        }
    }
}
