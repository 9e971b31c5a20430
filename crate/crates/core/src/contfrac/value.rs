//! Values of continued fractions and the halving transform.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::terms::CfTerms;
use crate::error::{Error, Result};
use crate::realnum::{QuadIrr, RealSpec};

/// `(A_n, A_{n-1}, B_n, B_{n-1})` for the finite sequence `a`.
pub(crate) fn convergent_pair(a: &[BigInt]) -> (BigInt, BigInt, BigInt, BigInt) {
    let (mut p, mut p1) = (BigInt::one(), BigInt::zero());
    let (mut q, mut q1) = (BigInt::zero(), BigInt::one());
    for t in a {
        let np = t * &p + &p1;
        let nq = t * &q + &q1;
        p1 = std::mem::replace(&mut p, np);
        q1 = std::mem::replace(&mut q, nq);
    }
    (p, p1, q, q1)
}

/// Applies `y -> (A y + A') / (B y + B')` for the prefix `a` to an exact tail value.
fn mobius(a: &[BigInt], y: &QuadIrr) -> Result<QuadIrr> {
    if a.is_empty() {
        return Ok(y.clone());
    }
    let (p, p1, q, q1) = convergent_pair(a);
    let num = y.mul_int(&p).add_rational(&BigRational::from_integer(p1));
    let den = y.mul_int(&q).add_rational(&BigRational::from_integer(q1));
    num.div(&den)
}

/// Value of a purely periodic expansion `[period(p_0, ..., p_{L-1})]`, the
/// positive root of `Q_L y^2 + (Q_{L-1} - P_L) y - P_{L-1} = 0`.
fn purely_periodic(period: &[BigInt]) -> Result<QuadIrr> {
    let (p, p1, q, q1) = convergent_pair(period);
    let b = &q1 - &p;
    // the primitive polynomial keeps the radicand free of large square factors
    let g = q.gcd(&b).gcd(&p1);
    let (q, b, p1) = (&q / &g, &b / &g, &p1 / &g);
    let disc = &b * &b + BigInt::from(4) * &q * &p1;
    QuadIrr::new(-b, BigInt::one(), disc, BigInt::from(2) * q)
}

/// The exact value: a rational for finite sequences, a quadratic
/// irrational for eventually periodic ones.
pub fn value_from_cf(terms: &CfTerms) -> Result<RealSpec> {
    if !terms.is_periodic() {
        let (p, _, q, _) = convergent_pair(terms.head());
        return Ok(RealSpec::Rational(BigRational::new(p, q)));
    }
    let y = purely_periodic(terms.period())?;
    let x = mobius(terms.head(), &y)?;
    if x.is_rational() {
        return Err(Error::Internal(format!("periodic expansion {terms} gave a rational")));
    }
    Ok(RealSpec::QuadIrr(x))
}

/// The exact value as a quadratic, for periodic sequences only.
pub fn quad_from_cf(terms: &CfTerms) -> Result<QuadIrr> {
    match value_from_cf(terms)? {
        RealSpec::QuadIrr(q) => Ok(q),
        other => Err(Error::input(format!("{terms} is finite, value {other}"))),
    }
}

fn halve_term(k: usize, a: &BigInt) -> Result<BigInt> {
    if k % 2 == 0 {
        if a.is_odd() {
            return Err(Error::input(format!(
                "halving needs even a_{k}, got {a}"
            )));
        }
        Ok(a / 2)
    } else {
        Ok(a * 2)
    }
}

/// `[a0/2; 2a1, a2/2, 2a3, ...]`, the expansion of half the value, for
/// sequences whose even-indexed terms are all even.
pub fn halve_cf(terms: &CfTerms) -> Result<CfTerms> {
    let h = terms.head().len();
    let head = (0..h)
        .map(|k| halve_term(k, &terms.head()[k]))
        .collect::<Result<Vec<_>>>()?;
    if !terms.is_periodic() {
        let out = CfTerms::canonical_finite(head);
        return CfTerms::finite(out);
    }
    let l = terms.period().len();
    // an odd period shifts parity, so the halved period is twice as long
    let l2 = if l % 2 == 0 { l } else { 2 * l };
    let period = (h..h + l2)
        .map(|k| halve_term(k, &terms.term(k).expect("periodic")))
        .collect::<Result<Vec<_>>>()?;
    CfTerms::new(head, period)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cf(s: &str) -> CfTerms {
        s.parse().unwrap()
    }

    #[test]
    fn long_period_keeps_small_radicand() {
        let q: QuadIrr = "(-29+1*sqrt(193))/11".parse().unwrap();
        let terms = crate::contfrac::cf_of_quadratic(&q).unwrap().terms().clone();
        assert!(terms.period().len() > 40);
        assert_eq!(quad_from_cf(&terms).unwrap(), q);
    }

    fn quad(s: &str) -> QuadIrr {
        s.parse().unwrap()
    }

    #[test]
    fn golden_ratio() {
        assert_eq!(
            value_from_cf(&cf("[1;period(1)]")).unwrap(),
            RealSpec::QuadIrr(quad("(1+1*sqrt(5))/2"))
        );
    }

    #[test]
    fn empty_family_closed_form() {
        for c in 1..=20i64 {
            let got = quad_from_cf(&CfTerms::from_i64(&[1], &[c, 1]).unwrap()).unwrap();
            let want = QuadIrr::new(c.into(), 1.into(), (c * (c + 4)).into(), (2 * c).into()).unwrap();
            assert_eq!(got, want, "c = {c}");
        }
    }

    #[test]
    fn one_over_root5() {
        let got = quad_from_cf(&cf("[0;2,period(4)]")).unwrap();
        assert_eq!(got, quad("(0+1*sqrt(5))/5"));
    }

    #[test]
    fn finite_is_rational() {
        let v = value_from_cf(&cf("[3;7,15,1,292]")).unwrap();
        assert_eq!(v, RealSpec::rational(103993, 33102));
    }

    #[test]
    fn halving_infinite_family_pattern() {
        let h = halve_cf(&cf("[0;2,period(4,3)]")).unwrap();
        assert_eq!(h.to_string(), "[0;4,period(2,6)]");
        let a = quad_from_cf(&cf("[0;2,period(4,3)]")).unwrap();
        let b = quad_from_cf(&h).unwrap();
        assert_eq!(b, a.mul_rational(&BigRational::new(1.into(), 2.into())));
    }

    #[test]
    fn halving_odd_period() {
        let t = cf("[2;period(2)]");
        let h = halve_cf(&t).unwrap();
        assert_eq!(h.to_string(), "[1;period(4,1)]");
        assert_eq!(
            quad_from_cf(&h).unwrap(),
            quad_from_cf(&t).unwrap().mul_rational(&BigRational::new(1.into(), 2.into()))
        );
    }

    #[test]
    fn halving_rejects_odd_even_index() {
        assert!(halve_cf(&cf("[1;period(2)]")).is_err());
        assert!(halve_cf(&cf("[0;2,period(3,1)]")).is_err());
    }
}
