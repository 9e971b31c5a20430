//! Expansions with convergents and the `lambda_k` factors.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::terms::CfTerms;
use super::value::quad_from_cf;
use crate::error::{Error, Result};
use crate::realnum::{Ball, Dyadic, Exact, QuadIrr, RealSpec, RefinePolicy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpansionKind {
    /// Exact, eventually periodic.
    Periodic,
    /// Exact and finite; the source is rational.
    Rational,
    /// The first terms of an irrational, each certified.
    Truncated,
}

/// Partial quotients of a real number together with its source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CFExpansion {
    terms: CfTerms,
    kind: ExpansionKind,
    source: RealSpec,
    precision_bits: Option<u64>,
}

/// `A_k / B_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergent {
    pub k: usize,
    #[serde(rename = "A", with = "crate::serde_big")]
    pub num: BigInt,
    #[serde(rename = "B", with = "crate::serde_big")]
    pub den: BigInt,
}

/// `lambda_k = B_{k-2}/B_{k-1} + [a_k; a_{k+1}, ...]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lambda {
    pub k: usize,
    pub ball: Ball,
    /// Exact value for periodic expansions.
    pub exact: Option<QuadIrr>,
    /// The tail was bounded by the trivial bounds or extrapolated past the
    /// certified terms.
    pub coarse: bool,
}

impl CFExpansion {
    pub fn periodic(terms: CfTerms, source: RealSpec) -> Result<Self> {
        if !terms.is_periodic() {
            return Err(Error::input("periodic expansion needs a period"));
        }
        Ok(CFExpansion {
            terms,
            kind: ExpansionKind::Periodic,
            source,
            precision_bits: None,
        })
    }

    pub fn terms(&self) -> &CfTerms {
        &self.terms
    }

    pub fn kind(&self) -> ExpansionKind {
        self.kind
    }

    pub fn source(&self) -> &RealSpec {
        &self.source
    }

    pub fn precision_bits(&self) -> Option<u64> {
        self.precision_bits
    }

    /// Largest certified index, `None` when every term is known.
    pub fn certified_upto(&self) -> Option<usize> {
        match self.kind {
            ExpansionKind::Periodic => None,
            _ => Some(self.terms.head().len() - 1),
        }
    }

    /// Number of known terms, `None` when unbounded.
    pub fn known_len(&self) -> Option<usize> {
        self.certified_upto().map(|k| k + 1)
    }

    pub fn term(&self, k: usize) -> Result<BigInt> {
        self.terms.term(k).ok_or(Error::Range {
            index: k,
            certified_upto: self.terms.head().len() - 1,
        })
    }

    /// Convergents `0..=k`.
    pub fn convergents_upto(&self, k: usize) -> Result<Vec<Convergent>> {
        let mut out = Vec::with_capacity(k + 1);
        let (mut p, mut p1) = (BigInt::one(), BigInt::zero());
        let (mut q, mut q1) = (BigInt::zero(), BigInt::one());
        for i in 0..=k {
            let a = self.term(i)?;
            let np = &a * &p + &p1;
            let nq = &a * &q + &q1;
            p1 = std::mem::replace(&mut p, np);
            q1 = std::mem::replace(&mut q, nq);
            out.push(Convergent {
                k: i,
                num: p.clone(),
                den: q.clone(),
            });
        }
        Ok(out)
    }

    pub fn convergent(&self, k: usize) -> Result<Convergent> {
        Ok(self.convergents_upto(k)?.pop().expect("k + 1 entries"))
    }

    /// `B_{k-2}` and `B_{k-1}`, also `A_{k-2}` and `A_{k-1}`, with
    /// `A_{-2} = 0, A_{-1} = 1, B_{-2} = 1, B_{-1} = 0`.
    fn previous_two(&self, k: usize) -> Result<(BigInt, BigInt, BigInt, BigInt)> {
        let (mut p, mut p1) = (BigInt::one(), BigInt::zero());
        let (mut q, mut q1) = (BigInt::zero(), BigInt::one());
        for i in 0..k {
            let a = self.term(i)?;
            let np = &a * &p + &p1;
            let nq = &a * &q + &q1;
            p1 = std::mem::replace(&mut p, np);
            q1 = std::mem::replace(&mut q, nq);
        }
        Ok((p1, p, q1, q))
    }

    /// Exact complete quotient `x_k = [a_k; a_{k+1}, ...]` for periodic
    /// expansions.
    pub fn complete_quotient_exact(&self, k: usize) -> Result<QuadIrr> {
        let h = self.terms.head();
        let tail = if k < h.len() {
            CfTerms::new(h[k..].to_vec(), self.terms.period().to_vec())?
        } else {
            let p = self.terms.period();
            let j = (k - h.len()) % p.len();
            let mut rot = p[j + 1..].to_vec();
            rot.extend_from_slice(&p[..=j]);
            CfTerms::new(vec![p[j].clone()], rot)?
        };
        quad_from_cf(&tail)
    }

    /// Encloses `x_k`; `true` in the flag means coarse.
    fn complete_quotient_ball(&self, k: usize, prec: u64) -> Result<(Ball, bool)> {
        let (a2, a1, b2, b1) = self.previous_two(k)?;
        let known = self.terms.term(k);
        let trivial = known.as_ref().map(|a| {
            Ball::new(Dyadic::from(a.clone()), Dyadic::from(a + BigInt::one()))
        });
        if self.kind == ExpansionKind::Rational {
            if k >= self.terms.head().len() {
                return Err(Error::Range {
                    index: k,
                    certified_upto: self.terms.head().len() - 1,
                });
            }
            let rest = self.terms.head()[k..].to_vec();
            let (p, _, q, _) = super::value::convergent_pair(&rest);
            return Ok((Ball::from_rational(&BigRational::new(p, q), prec), false));
        }
        // x_k = (A_{k-2} - B_{k-2} x) / (B_{k-1} x - A_{k-1})
        let wp = prec + 2 * b1.bits().max(b2.bits()) + 32;
        let x = self.source.ball_at(wp)?;
        let num = Ball::from_int(a2).sub(&x.mul_int(&b2, wp), wp);
        let den = x.mul_int(&b1, wp).sub(&Ball::from_int(a1), wp);
        let beyond = known.is_none();
        match (num.div(&den, prec), trivial) {
            (Some(v), Some(t)) => match v.intersect(&t) {
                Some(i) => Ok((i, false)),
                None => Err(Error::Internal(format!(
                    "complete quotient x_{k} = {v} misses its partial quotient range {t}"
                ))),
            },
            (Some(v), None) => Ok((v, beyond)),
            (None, Some(t)) => Ok((t, true)),
            (None, None) => Err(Error::Range {
                index: k,
                certified_upto: self.terms.head().len() - 1,
            }),
        }
    }

    /// `lambda_k` for `k >= 1`, exact when the expansion is periodic.
    pub fn lambda(&self, k: usize, prec: u64) -> Result<Lambda> {
        if k == 0 {
            return Err(Error::input("lambda_k is defined for k >= 1"));
        }
        let (_, _, b2, b1) = self.previous_two(k)?;
        let head = BigRational::new(b2, b1);
        if self.kind == ExpansionKind::Periodic {
            let q = self.complete_quotient_exact(k)?.add_rational(&head);
            return Ok(Lambda {
                k,
                ball: q.to_ball(prec),
                exact: Some(q),
                coarse: false,
            });
        }
        let (tail, coarse) = self.complete_quotient_ball(k, prec)?;
        let ball = tail.add(&Ball::from_rational(&head, prec + 4), prec);
        Ok(Lambda {
            k,
            ball,
            exact: None,
            coarse,
        })
    }
}

/// Convergent `k` of an expansion.
pub fn convergents(cf: &CFExpansion, k: usize) -> Result<Convergent> {
    cf.convergent(k)
}

/// `lambda_k` of an expansion at working precision `p`.
pub fn lambda_k(cf: &CFExpansion, k: usize, p: u64) -> Result<Lambda> {
    cf.lambda(k, p)
}

/// Exact eventually periodic expansion of an irrational quadratic.
pub fn cf_of_quadratic(q: &QuadIrr) -> Result<CFExpansion> {
    if q.is_rational() {
        return Err(Error::input(format!(
            "{q} is rational; use the finite expansion instead"
        )));
    }
    // q = (P + sqrt(D)) / Q with Q | D - P^2
    let (mut p, mut big_q, mut d) = if q.b().is_positive() {
        (q.a().clone(), q.c().clone(), q.b() * q.b() * q.d())
    } else {
        (-q.a().clone(), -q.c().clone(), q.b() * q.b() * q.d())
    };
    if !(&d - &p * &p).is_multiple_of(&big_q) {
        let aq = big_q.abs();
        p *= &aq;
        d *= &aq * &aq;
        big_q *= &aq;
    }
    let s = d.sqrt();
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut terms: Vec<BigInt> = Vec::new();
    loop {
        if let Some(&start) = seen.get(&(p.clone(), big_q.clone())) {
            let mut period = terms.split_off(start);
            if terms.is_empty() {
                // purely periodic: a0 stays in the head, the period rotates
                period.rotate_left(1);
                terms.push(period.last().expect("nonempty period").clone());
            }
            let exp = CfTerms::new(terms, period)?;
            return CFExpansion::periodic(exp, RealSpec::QuadIrr(q.clone()));
        }
        seen.insert((p.clone(), big_q.clone()), terms.len());
        // floor((P + sqrt D) / Q); sqrt D is irrational
        let a = if big_q.is_positive() {
            (&p + &s).div_floor(&big_q)
        } else {
            -((&p + &s).div_floor(&-&big_q)) - 1
        };
        p = &a * &big_q - &p;
        big_q = (&d - &p * &p) / &big_q;
        terms.push(a);
    }
}

/// Finite expansion of a rational.
pub fn cf_of_rational(r: &BigRational) -> CFExpansion {
    let mut terms = Vec::new();
    let (mut n, mut d) = (r.numer().clone(), r.denom().clone());
    while !d.is_zero() {
        let (q, rem) = n.div_mod_floor(&d);
        terms.push(q);
        n = std::mem::replace(&mut d, rem);
    }
    let terms = CfTerms::canonical_finite(terms);
    CFExpansion {
        terms: CfTerms::finite(terms).expect("euclid gives positive tail"),
        kind: ExpansionKind::Rational,
        source: RealSpec::Rational(r.clone()),
        precision_bits: None,
    }
}

/// Extracts terms from one enclosure at working precision `prec`.
fn extract_terms(x: &RealSpec, want: usize, prec: u64) -> Result<Vec<BigInt>> {
    let mut b = x.ball_at(prec)?;
    let mut out = Vec::new();
    while out.len() < want {
        let Some((fl, fr)) = b.frac() else { break };
        out.push(fl);
        if out.len() == want {
            break;
        }
        let Some(r) = fr.recip(prec) else { break };
        b = r;
    }
    Ok(out)
}

/// The first `count + 1` partial quotients of an irrational, each certified
/// by interval arithmetic. Falls short (with `certified_upto < count`) only
/// when the precision cap is reached.
pub fn cf_of_real(x: &RealSpec, count: usize, policy: &RefinePolicy) -> Result<CFExpansion> {
    x.validate()?;
    if let Some(Exact::Rational(r)) = x.exact() {
        return Err(Error::input(format!(
            "{r} is rational; use the finite expansion instead"
        )));
    }
    let want = count + 1;
    let floor = (8 * want as u64 + 64).min(policy.cap_bits);
    let mut best: Vec<BigInt> = Vec::new();
    let mut used = floor;
    let mut last = 0;
    for prec in policy.precisions().map(|p| p.max(floor)) {
        if prec == last {
            continue;
        }
        last = prec;
        let got = extract_terms(x, want, prec)?;
        if got.len() > best.len() {
            best = got;
            used = prec;
        }
        if best.len() >= want {
            break;
        }
    }
    if best.is_empty() {
        return Err(Error::undecided(policy.cap_bits, format!("floor of {x}")));
    }
    Ok(CFExpansion {
        terms: CfTerms::finite(best)?,
        kind: ExpansionKind::Truncated,
        source: x.clone(),
        precision_bits: Some(used),
    })
}

/// Exact expansion when `x` is rational or quadratic, certified terms
/// otherwise, grown until `B_k > bound` holds for `extra` further indices.
pub fn expansion_past(
    x: &RealSpec,
    bound: &BigInt,
    extra: usize,
    policy: &RefinePolicy,
) -> Result<CFExpansion> {
    match x.exact() {
        Some(Exact::Quadratic(q)) => return cf_of_quadratic(&q),
        Some(Exact::Rational(r)) => return Ok(cf_of_rational(&r)),
        None => {}
    }
    let mut count = 16usize;
    loop {
        let cf = cf_of_real(x, count, policy)?;
        let n = cf.known_len().expect("truncated");
        let convs = cf.convergents_upto(n - 1)?;
        if let Some(first) = convs.iter().position(|c| &c.den > bound) {
            if first + extra < n {
                return Ok(cf);
            }
        }
        if n < count + 1 {
            // cap reached; the caller sees how far it got
            return Ok(cf);
        }
        count *= 2;
    }
}

#[derive(Serialize, Deserialize)]
struct CfJson {
    kind: ExpansionKind,
    #[serde(with = "crate::serde_big::vec")]
    a: Vec<BigInt>,
    periodic_tail: Option<CfTerms>,
    source: RealSpec,
    certified_upto: Option<usize>,
    precision_bits: Option<u64>,
}

impl Serialize for CFExpansion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut a = self.terms.head().to_vec();
        a.extend_from_slice(self.terms.period());
        CfJson {
            kind: self.kind,
            a,
            periodic_tail: self.terms.is_periodic().then(|| self.terms.clone()),
            source: self.source.clone(),
            certified_upto: self.certified_upto(),
            precision_bits: self.precision_bits,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CFExpansion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CfJson::deserialize(d)?;
        let terms = match j.periodic_tail {
            Some(t) => t,
            None => CfTerms::finite(j.a).map_err(serde::de::Error::custom)?,
        };
        Ok(CFExpansion {
            terms,
            kind: j.kind,
            source: j.source,
            precision_bits: j.precision_bits,
        })
    }
}

/// `Some((c, k))` when `|x - m/n| <= 1/(2n^2)`: then `m = c A_k`,
/// `n = c B_k` and `lambda_{k+1} > 2c^2`, all certified.
pub fn best_approx_witness(
    x: &RealSpec,
    m: &BigInt,
    n: &BigInt,
    policy: &RefinePolicy,
) -> Result<Option<(BigInt, usize)>> {
    if !n.is_positive() {
        return Err(Error::input("n must be positive"));
    }
    let target = BigRational::new(m.clone(), n.clone());
    let bound = BigRational::new(BigInt::one(), BigInt::from(2) * n * n);
    let close = match x.exact() {
        Some(e) => {
            let diff = e.to_quad().add_rational(&-target.clone());
            let sgn_lo = diff.add_rational(&bound).signum();
            let sgn_hi = diff.add_rational(&-bound.clone()).signum();
            sgn_lo >= 0 && sgn_hi <= 0
        }
        None => {
            let mut decided = None;
            for prec in policy.precisions() {
                let wp = prec + 2 * n.bits();
                let diff = x
                    .ball_at(wp)?
                    .sub(&Ball::from_rational(&target, wp), wp);
                let bb = Ball::from_rational(&bound, wp);
                let ad = diff.mag_upper();
                if ad <= *bb.lo() {
                    decided = Some(true);
                    break;
                }
                let lo_abs = if diff.contains_zero() {
                    Dyadic::zero()
                } else {
                    diff.lo().abs().min(diff.hi().abs())
                };
                if lo_abs > *bb.hi() {
                    decided = Some(false);
                    break;
                }
            }
            decided.ok_or_else(|| {
                Error::undecided(policy.cap_bits, format!("|x - {target}| against 1/(2n^2)"))
            })?
        }
    };
    if !close {
        return Ok(None);
    }
    let c = m.gcd(n);
    let (am, bn) = (m / &c, n / &c);
    let cf = expansion_past(x, &bn, 2, policy)?;
    let last = cf.known_len().map(|l| l - 1).unwrap_or(usize::MAX);
    let mut k = 0usize;
    let (mut p, mut p1) = (BigInt::one(), BigInt::zero());
    let (mut q, mut q1) = (BigInt::zero(), BigInt::one());
    while k <= last {
        let a = cf.term(k)?;
        let np = &a * &p + &p1;
        let nq = &a * &q + &q1;
        p1 = std::mem::replace(&mut p, np);
        q1 = std::mem::replace(&mut q, nq);
        if q > bn {
            break;
        }
        if p == am && q == bn {
            let two_c2 = Ball::from_int(BigInt::from(2) * &c * &c);
            for prec in policy.precisions() {
                let lam = cf.lambda(k + 1, prec)?;
                if let Some(e) = &lam.exact {
                    let ok = e.add_rational(&-BigRational::from_integer(BigInt::from(2) * &c * &c)).signum() > 0;
                    return Ok(ok.then_some((c, k)));
                }
                if lam.ball.gt(&two_c2) {
                    return Ok(Some((c, k)));
                }
                if lam.ball.hi() <= two_c2.lo() {
                    return Ok(None);
                }
            }
            return Err(Error::undecided(policy.cap_bits, "lambda_{k+1} against 2c^2"));
        }
        k += 1;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mtheta::ThetaSpec;

    fn quad(s: &str) -> QuadIrr {
        s.parse().unwrap()
    }

    fn two_over_log2() -> RealSpec {
        RealSpec::recip_log(ThetaSpec::rational(2, 1).unwrap(), 2)
    }

    #[test]
    fn quadratic_examples() {
        assert_eq!(cf_of_quadratic(&quad("(0+1*sqrt(2))/1")).unwrap().terms().to_string(), "[1;period(2)]");
        assert_eq!(cf_of_quadratic(&quad("(1+1*sqrt(5))/2")).unwrap().terms().to_string(), "[1;period(1)]");
        assert_eq!(cf_of_quadratic(&quad("(0+1*sqrt(5))/5")).unwrap().terms().to_string(), "[0;2,period(4)]");
        assert_eq!(cf_of_quadratic(&quad("(0+1*sqrt(7))/1")).unwrap().terms().to_string(), "[2;period(1,1,1,4)]");
        assert_eq!(cf_of_quadratic(&quad("(0-1*sqrt(2))/1")).unwrap().terms().to_string(), "[-2;1,1,period(2)]");
        assert!(cf_of_quadratic(&QuadIrr::from_int(3)).is_err());
    }

    #[test]
    fn root2_convergents() {
        let cf = cf_of_quadratic(&quad("(0+1*sqrt(2))/1")).unwrap();
        let c = convergents(&cf, 3).unwrap();
        assert_eq!((c.num, c.den), (BigInt::from(17), BigInt::from(12)));
    }

    #[test]
    fn two_over_log2_terms() {
        let cf = cf_of_real(&two_over_log2(), 8, &RefinePolicy::default()).unwrap();
        let got: Vec<i64> = cf.terms().head().iter().map(|x| x.try_into().unwrap()).collect();
        assert_eq!(&got[..8], &[2, 1, 7, 1, 2, 1, 1, 1]);
        assert_eq!(cf.certified_upto(), Some(8));
        let c0 = convergents(&cf, 0).unwrap();
        let c1 = convergents(&cf, 1).unwrap();
        assert_eq!((c0.num, c0.den), (2.into(), 1.into()));
        assert_eq!((c1.num, c1.den), (3.into(), 1.into()));
    }

    #[test]
    fn b35_of_two_over_log2() {
        let cf = cf_of_real(&two_over_log2(), 40, &RefinePolicy::default()).unwrap();
        assert_eq!(convergents(&cf, 35).unwrap().den, BigInt::from(777451915729368u64));
        assert!(matches!(convergents(&cf, 41), Err(Error::Range { .. })));
    }

    #[test]
    fn lambda2_of_two_over_log2() {
        let cf = cf_of_real(&two_over_log2(), 10, &RefinePolicy::default()).unwrap();
        let l = lambda_k(&cf, 2, 80).unwrap();
        assert!(!l.coarse);
        let six_over_log2 = RealSpec::recip_log(ThetaSpec::rational(2, 1).unwrap(), 6).ball_at(80).unwrap();
        let lo = Ball::from_rational(&BigRational::new(865.into(), 100.into()), 80);
        let hi = Ball::from_rational(&BigRational::new(873.into(), 100.into()), 80);
        assert!(lo.lt(&six_over_log2) && six_over_log2.lt(&l.ball) && l.ball.lt(&hi));
        assert!((l.ball.to_f64() - 8.7257).abs() < 1e-3);
    }

    #[test]
    fn root2_even_lambdas_below_four() {
        let cf = cf_of_quadratic(&quad("(0+1*sqrt(2))/1")).unwrap();
        for k in 1..=30 {
            let l = cf.lambda(2 * k, 64).unwrap();
            let e = l.exact.unwrap();
            assert!(e.add_rational(&BigRational::from_integer((-4).into())).signum() < 0);
        }
    }

    #[test]
    fn rational_input_rejected_by_real_path() {
        assert!(cf_of_real(&RealSpec::rational(3, 7), 4, &RefinePolicy::default()).is_err());
        let r = cf_of_rational(&BigRational::new(355.into(), 113.into()));
        assert_eq!(r.terms().to_string(), "[3;7,16]");
    }

    #[test]
    fn witnesses() {
        let p = RefinePolicy::default();
        assert_eq!(
            best_approx_witness(&two_over_log2(), &3.into(), &1.into(), &p).unwrap(),
            Some((BigInt::from(1), 1))
        );
        let r2 = RealSpec::QuadIrr(quad("(0+1*sqrt(2))/1"));
        assert_eq!(
            best_approx_witness(&r2, &17.into(), &12.into(), &p).unwrap(),
            Some((BigInt::from(1), 3))
        );
        assert_eq!(best_approx_witness(&r2, &5.into(), &2.into(), &p).unwrap(), None);
    }

    #[test]
    fn json_roundtrip() {
        let cf = cf_of_quadratic(&quad("(0+1*sqrt(5))/5")).unwrap();
        let j = serde_json::to_string(&cf).unwrap();
        let back: CFExpansion = serde_json::from_str(&j).unwrap();
        assert_eq!(back, cf);
        let t = cf_of_real(&two_over_log2(), 5, &RefinePolicy::default()).unwrap();
        let back: CFExpansion = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }
}
