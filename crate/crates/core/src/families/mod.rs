//! The explicit families of `theta`: one with empty atypical set, one with
//! infinitely many atypical continuants, their verifiers, and the count
//! statistic.

mod identity;
mod sample;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atypical::{
    enumerate_continuant, q_set_membership, scan_direct, EnumerationOptions, FilterOutcome,
    LambdaComparison,
};
use crate::contfrac::{cf_of_quadratic, cf_of_real, halve_cf, quad_from_cf, CFExpansion, CfTerms};
use crate::error::{Error, Result};
use crate::mtheta::{LogTheta, ThetaContext, ThetaSpec};
use crate::realnum::{QuadIrr, RealSpec};

pub use identity::{identity_scan, IdentityReport};
pub use sample::sample_exp_quadratic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyVariant {
    Empty,
    Infinite,
}

/// A family member: the expansion of `l = 2/log theta` and the derived `theta`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub variant: FamilyVariant,
    /// Partial quotients of `l`.
    pub terms: CfTerms,
    /// The parameter when built from `c`.
    pub c: Option<u64>,
    pub theta: ThetaSpec,
    /// `log theta` in closed form.
    pub log_theta: QuadIrr,
}

/// The indices `1..` of one full pass over head and two periods, enough to
/// see every even-index term of an eventually periodic expansion.
fn even_terms(terms: &CfTerms) -> Vec<(usize, BigInt)> {
    let span = terms.head().len() + 2 * terms.period().len().max(1);
    (1..=span / 2)
        .filter_map(|k| terms.term(2 * k).map(|a| (2 * k, a)))
        .collect()
}

fn finish(variant: FamilyVariant, terms: CfTerms, c: Option<u64>) -> Result<FamilyParams> {
    let theta = ThetaSpec::from_cf(terms.clone())?;
    let log_theta = match theta.log() {
        LogTheta::Quadratic(q) => q.clone(),
        other => return Err(Error::Internal(format!("family log theta is {other:?}"))),
    };
    Ok(FamilyParams {
        variant,
        terms,
        c,
        theta,
        log_theta,
    })
}

/// `a_0 >= 1` and `a_{2k} <= 3 a_0 - 2` for all `k >= 1`.
pub fn build_empty_family(terms: CfTerms) -> Result<FamilyParams> {
    if !terms.is_periodic() {
        return Err(Error::input("the expansion must be eventually periodic"));
    }
    let a0 = terms.term(0).expect("nonempty");
    if a0 < BigInt::from(1) {
        return Err(Error::input(format!("a_0 = {a0} must be at least 1")));
    }
    let cap = BigInt::from(3) * &a0 - 2;
    if let Some((i, a)) = even_terms(&terms).into_iter().find(|(_, a)| *a > cap) {
        return Err(Error::input(format!(
            "a_{i} = {a} exceeds 3 a_0 - 2 = {cap}"
        )));
    }
    finish(FamilyVariant::Empty, terms, None)
}

/// `l = [1; c, 1, c, ...]`, so `theta = e^(-c + sqrt(c(c+4)))`.
pub fn empty_family_c(c: u64) -> Result<FamilyParams> {
    if c == 0 {
        return Err(Error::input("c must be positive"));
    }
    let terms = CfTerms::new(vec![1.into()], vec![c.into(), 1.into()])?;
    let mut fp = build_empty_family(terms)?;
    fp.c = Some(c);
    let c = BigInt::from(c);
    let closed = QuadIrr::new(-&c, 1.into(), &c * (&c + 4), 1.into())?;
    if closed != fp.log_theta {
        return Err(Error::Internal(format!(
            "log theta {} differs from -c + sqrt(c(c+4)) = {closed}",
            fp.log_theta
        )));
    }
    Ok(fp)
}

/// `a_0 = 0`, `a_1 = 2` and `a_{2k} = 4` for all `k >= 1`.
pub fn build_infinite_family(terms: CfTerms) -> Result<FamilyParams> {
    if !terms.is_periodic() {
        return Err(Error::input("the expansion must be eventually periodic"));
    }
    if terms.term(0) != Some(BigInt::zero()) {
        return Err(Error::input("a_0 must be 0"));
    }
    if terms.term(1) != Some(BigInt::from(2)) {
        return Err(Error::input("a_1 must be 2"));
    }
    if let Some((i, a)) = even_terms(&terms).into_iter().find(|(_, a)| *a != BigInt::from(4)) {
        return Err(Error::input(format!("a_{i} = {a} must be 4")));
    }
    let fp = finish(FamilyVariant::Infinite, terms, None)?;
    let lo = QuadIrr::from_int(4);
    let hi = QuadIrr::from_rational(&BigRational::new(9.into(), 2.into()));
    if fp.log_theta.sub(&lo)?.signum() <= 0 || fp.log_theta.sub(&hi)?.signum() >= 0 {
        return Err(Error::Internal(format!(
            "log theta = {} is outside (4, 9/2)",
            fp.log_theta
        )));
    }
    Ok(fp)
}

/// `l = [0; 2, 4, c, 4, c, ...]`, so `theta = e^(4 - c + sqrt(c(c+1)))`.
pub fn infinite_family_c(c: u64) -> Result<FamilyParams> {
    if c == 0 {
        return Err(Error::input("c must be positive"));
    }
    let terms = CfTerms::new(vec![0.into(), 2.into()], vec![4.into(), c.into()])?;
    let mut fp = build_infinite_family(terms)?;
    fp.c = Some(c);
    let c = BigInt::from(c);
    let closed = QuadIrr::new(4 - &c, 1.into(), &c * (&c + 1), 1.into())?;
    if closed != fp.log_theta {
        return Err(Error::Internal(format!(
            "log theta {} differs from 4 - c + sqrt(c(c+1)) = {closed}",
            fp.log_theta
        )));
    }
    Ok(fp)
}

impl fmt::Display for FamilyParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.variant {
            FamilyVariant::Empty => "empty",
            FamilyVariant::Infinite => "infinite",
        };
        match self.c {
            Some(c) => write!(f, "{tag}:c={c}"),
            None => write!(f, "{tag}:a={}", self.terms),
        }
    }
}

impl FromStr for FamilyParams {
    type Err = Error;

    /// `empty:c=<int>`, `empty:a=[...]`, `infinite:c=<int>`, `infinite:a=[...]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::parse(format!("family `{s}`: want empty|infinite:c=<int> or :a=[...]"));
        let (tag, body) = s.split_once(':').ok_or_else(bad)?;
        let (key, val) = body.split_once('=').ok_or_else(bad)?;
        match (tag, key.trim()) {
            ("empty", "c") => empty_family_c(val.trim().parse().map_err(|_| bad())?),
            ("infinite", "c") => infinite_family_c(val.trim().parse().map_err(|_| bad())?),
            ("empty", "a") => build_empty_family(val.parse()?),
            ("infinite", "a") => build_infinite_family(val.parse()?),
            _ => Err(bad()),
        }
    }
}

/// One named assertion of a verifier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyReport {
    /// The family grammar string, or `root2` for the special case.
    pub family: String,
    pub theta: ThetaSpec,
    pub depth: usize,
    pub scan_limit: Option<u64>,
    pub checks: Vec<Check>,
    /// The `lambda_{2k}` comparisons, one per `k`.
    pub lambdas: Vec<LambdaComparison>,
    #[serde(with = "crate::serde_big::vec")]
    pub atypical_continuants: Vec<BigInt>,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl FamilyReport {
    fn new(family: String, theta: &ThetaSpec, depth: usize, scan_limit: Option<u64>) -> Self {
        FamilyReport {
            family,
            theta: theta.clone(),
            depth,
            scan_limit,
            checks: Vec::new(),
            lambdas: Vec::new(),
            atypical_continuants: Vec::new(),
            pass: false,
            notes: Vec::new(),
        }
    }

    fn seal(mut self) -> Self {
        self.pass = !self.checks.is_empty() && self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

fn lambda_exact(cf: &CFExpansion, k: usize) -> Result<QuadIrr> {
    Ok(cf.lambda(k, 64)?.exact.expect("periodic"))
}

fn comparison(cf: &CFExpansion, k: usize, bound: &QuadIrr) -> Result<LambdaComparison> {
    let lam = cf.lambda(k, 64)?;
    let s = lam.exact.as_ref().expect("periodic").sub(bound)?.signum();
    Ok(LambdaComparison {
        k,
        lambda: lam.ball,
        threshold: bound.to_ball(64),
        exceeds: Some(s > 0),
        equal: s == 0,
        precision_bits: None,
        exact: true,
        coarse: false,
    })
}

/// Shared body of the empty-set verifiers: `lambda_{2k} < bound` for
/// `k = 1..depth`, `bound <= 6/log theta`, no continuant candidate, and an
/// empty direct scan.
fn verify_no_candidates(
    mut rep: FamilyReport,
    ell: &CfTerms,
    bound: &QuadIrr,
    opts: &EnumerationOptions,
) -> Result<FamilyReport> {
    let cf = CFExpansion::periodic(ell.clone(), RealSpec::ContinuedFraction(ell.clone()))?;
    let six_over_log = rep
        .theta
        .recip_log_exact(&BigRational::from_integer(6.into()))
        .expect("family log theta is quadratic");
    let gap = six_over_log.sub(bound)?.signum();
    rep.checks.push(Check::new(
        "bound <= 6/log theta",
        gap >= 0,
        format!("bound {bound}, 6/log theta {six_over_log}"),
    ));
    for k in 1..=rep.depth {
        let c = comparison(&cf, 2 * k, bound)?;
        let below = c.exceeds == Some(false) && !c.equal;
        if !below {
            rep.checks.push(Check::new(
                format!("lambda_{} < bound", 2 * k),
                false,
                serde_json::to_string(&c).unwrap_or_default(),
            ));
        }
        rep.lambdas.push(c);
    }
    let all_below = rep.lambdas.iter().all(|c| c.exceeds == Some(false) && !c.equal);
    rep.checks.push(Check::new(
        format!("lambda_2k < bound for k = 1..{}", rep.depth),
        all_below,
        format!("{} comparisons, exact", rep.lambdas.len()),
    ));
    if rep.theta.lt_exp(3, opts.policy())? {
        if let Some(n) = rep.scan_limit {
            let e = enumerate_continuant(&rep.theta, &BigInt::from(n), opts)?;
            let passed = e
                .candidates
                .iter()
                .filter(|c| c.outcome != FilterOutcome::Rejected)
                .count();
            rep.checks.push(Check::new(
                "continuant enumerator finds no candidate",
                passed == 0 && e.complete,
                format!("{} candidates examined, {passed} passed", e.candidates_examined),
            ));
        }
    }
    if let Some(n) = rep.scan_limit {
        let s = scan_direct(&rep.theta, n, opts)?;
        rep.checks.push(Check::new(
            format!("direct scan of [1, {n}] is empty"),
            s.members.is_empty() && s.complete,
            format!(
                "members {:?}, undecided {}",
                s.members.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                s.undecided.len()
            ),
        ));
    }
    Ok(rep.seal())
}

/// Verifies `A_theta` is empty for a member of the empty family.
pub fn verify_empty(fp: &FamilyParams, depth: usize, scan_limit: u64, opts: &EnumerationOptions) -> Result<FamilyReport> {
    let a0 = fp.terms.term(0).expect("nonempty");
    verify_empty_against(fp, depth, scan_limit, &BigRational::from_integer(3 * a0), opts)
}

/// [`verify_empty`] with the `lambda` bound given explicitly, so a wrong
/// bound can be shown to fail.
pub fn verify_empty_against(
    fp: &FamilyParams,
    depth: usize,
    scan_limit: u64,
    bound: &BigRational,
    opts: &EnumerationOptions,
) -> Result<FamilyReport> {
    if fp.variant != FamilyVariant::Empty {
        return Err(Error::input(format!("{fp} is not in the empty family")));
    }
    let rep = FamilyReport::new(fp.to_string(), &fp.theta, depth, Some(scan_limit));
    verify_no_candidates(rep, &fp.terms, &QuadIrr::from_rational(bound), opts)
}

/// `theta = e^sqrt 2`: `lambda_{2k} < 4 < 3 sqrt 2 = 6/log theta`.
pub fn verify_root2(depth: usize, scan_limit: u64, opts: &EnumerationOptions) -> Result<FamilyReport> {
    let theta: ThetaSpec = "exp-quadratic:(0+1*sqrt(2))/1".parse()?;
    let ell = CfTerms::from_i64(&[1], &[2])?;
    let rep = FamilyReport::new("root2".into(), &theta, depth, Some(scan_limit));
    verify_no_candidates(rep, &ell, &QuadIrr::from_int(4), opts)
}

/// Continuant denominators `B_0..=B_last`.
fn dens(cf: &CFExpansion, last: usize) -> Result<Vec<BigInt>> {
    Ok(cf.convergents_upto(last)?.into_iter().map(|c| c.den).collect())
}

/// Verifies the infinite-family argument for `k = 3..=depth`.
pub fn verify_infinite(fp: &FamilyParams, depth: usize, opts: &EnumerationOptions) -> Result<FamilyReport> {
    if fp.variant != FamilyVariant::Infinite {
        return Err(Error::input(format!("{fp} is not in the infinite family")));
    }
    if depth < 3 {
        return Err(Error::input("depth must be at least 3"));
    }
    let mut rep = FamilyReport::new(fp.to_string(), &fp.theta, depth, None);
    rep.notes.push(format!(
        "infinitude is certified only through depth {depth}: B_5..B_{} are exhibited as atypical",
        2 * depth - 1
    ));
    let last = 2 * depth + 2;
    let ell_cf = CFExpansion::periodic(fp.terms.clone(), RealSpec::ContinuedFraction(fp.terms.clone()))?;
    let recip = fp
        .theta
        .recip_log_exact(&BigRational::from_integer(1.into()))
        .expect("quadratic log");
    let s_cf = cf_of_quadratic(&recip)?;

    // halving: 1/log theta = l/2
    let halved = halve_cf(&fp.terms)?;
    let exact_match = quad_from_cf(&halved)? == recip;
    let numeric = cf_of_real(&RealSpec::recip_log(fp.theta.clone(), 1), last, opts.policy())?;
    let mismatch = (0..=last).find(|&i| numeric.term(i).ok() != halved.term(i));
    rep.checks.push(Check::new(
        "halved expansion of 1/log theta",
        exact_match && mismatch.is_none(),
        match mismatch {
            None => format!("{halved} agrees through index {last}"),
            Some(i) => format!("index {i}: computed {:?}, halved {:?}", numeric.term(i).ok(), halved.term(i)),
        },
    ));

    // B/S relations
    let b = dens(&ell_cf, last)?;
    let s = dens(&s_cf, last)?;
    let bad = (0..last).find(|&i| if i % 2 == 0 { s[i] != b[i] } else { s[i] != 2 * &b[i] });
    rep.checks.push(Check::new(
        "S_2k = B_2k and S_2k+1 = 2 B_2k+1",
        bad.is_none(),
        match bad {
            None => format!("exact for indices 0..{}", last - 1),
            Some(i) => format!("fails at index {i}: B = {}, S = {}", b[i], s[i]),
        },
    ));
    let base = b[0] == BigInt::from(1) && s[1] == BigInt::from(4) && b[1] == BigInt::from(2) && b[2] == BigInt::from(9);
    rep.checks.push(Check::new(
        "base cases S_0 = B_0 = 1, S_1 = 2B_1 = 4, S_2 = B_2 = 9",
        base && s[0] == b[0] && s[2] == b[2],
        format!("B_0..2 = {}, {}, {}", b[0], b[1], b[2]),
    ));

    // lambda condition with delta = 2
    let threshold = QuadIrr::from_int(6).div(&fp.log_theta.add_rational(&BigRational::from_integer((-2).into())))?;
    let four = QuadIrr::from_int(4);
    let mut hyp = true;
    for k in 3..=depth {
        let c = comparison(&ell_cf, 2 * k, &threshold)?;
        let lam = lambda_exact(&ell_cf, 2 * k)?;
        hyp &= c.exceeds == Some(true) && lam.sub(&four)?.signum() > 0;
        rep.lambdas.push(c);
    }
    rep.checks.push(Check::new(
        "lambda_2k > 4 > 6/(log theta - 2) for k = 3..depth",
        hyp && four.sub(&threshold)?.signum() > 0,
        format!("6/(log theta - 2) = {threshold}"),
    ));
    let l = &fp.log_theta;
    let k0_ok = l.mul(l)?.mul(l)?.add_rational(&-BigRational::from_integer(120.into())).signum() < 0;
    rep.checks.push(Check::new(
        "(log theta)^3 / 120 < 1, so k0 = 3",
        k0_ok,
        format!("log theta = {l}"),
    ));

    // growth and the exclusion from Q_theta
    let tau_ok = (1..=depth).all(|i| {
        lambda_exact(&s_cf, 2 * i)
            .and_then(|t| t.sub(&four))
            .is_ok_and(|d| d.signum() < 0)
    });
    rep.checks.push(Check::new(
        "tau_2i < 4, so c = 1",
        tau_ok,
        format!("i = 1..{depth}"),
    ));
    let mut growth = true;
    let mut hit = None;
    for k in 3..=depth {
        growth &= b[2 * k - 1] > 5 * &b[2 * k - 3];
        if let Some(i) = (1..=k).find(|&i| s[2 * i - 1] == b[2 * k - 1]) {
            hit = Some((k, i));
        }
    }
    rep.checks.push(Check::new(
        "B_2k-1 > 5 B_2k-3 for k >= 3",
        growth,
        format!("k = 3..{depth}"),
    ));
    rep.checks.push(Check::new(
        "no B_2k-1 equals some S_2i-1",
        hit.is_none(),
        match hit {
            None => "no coincidence".to_string(),
            Some((k, i)) => format!("B_{} = S_{}", 2 * k - 1, 2 * i - 1),
        },
    ));

    // membership, in parallel over k
    let ctx = ThetaContext::new(fp.theta.clone(), *opts.policy());
    let results: Vec<(usize, Result<bool>, Result<bool>)> = (3..=depth)
        .into_par_iter()
        .map(|k| {
            let n = &b[2 * k - 1];
            let a = ctx.is_atypical(n, opts.membership.paranoid).map(|m| m.atypical);
            let q = q_set_membership(&fp.theta, n, opts.policy()).map(|q| q.member);
            (k, a, q)
        })
        .collect();
    let mut members_ok = true;
    for (k, a, q) in results {
        let (a, q) = (a?, q?);
        if a && !q {
            rep.atypical_continuants.push(b[2 * k - 1].clone());
        } else {
            members_ok = false;
            rep.checks.push(Check::new(
                format!("B_{} atypical and not in Q_theta", 2 * k - 1),
                false,
                format!("atypical {a}, in Q {q}"),
            ));
        }
    }
    rep.checks.push(Check::new(
        "B_2k-1 in A_theta and not in Q_theta for k = 3..depth",
        members_ok,
        format!("{} certified atypical continuants", rep.atypical_continuants.len()),
    ));
    Ok(rep.seal())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountStatistics {
    pub theta: ThetaSpec,
    #[serde(with = "crate::serde_big")]
    pub limit: BigInt,
    pub count: usize,
    /// `(log theta / 12) ln N`.
    pub expected: f64,
    /// `count / expected`.
    pub ratio: f64,
    pub complete: bool,
}

/// `|A_theta & [1, N]|` beside the prediction `(log theta / 12) ln N`.
/// Uses the continuant enumerator when it applies, else a direct scan.
pub fn count_statistics(theta: &ThetaSpec, limit: &BigInt, opts: &EnumerationOptions) -> Result<CountStatistics> {
    let policy = opts.policy();
    let report = if !theta.log_is_rational() && theta.lt_exp(3, policy)? {
        enumerate_continuant(theta, limit, opts)?
    } else {
        let n = limit
            .to_u64()
            .filter(|&n| n <= 10_000_000)
            .ok_or_else(|| Error::Unsupported(format!("{theta} needs a direct scan; limit {limit} is too large")))?;
        scan_direct(theta, n, opts)?
    };
    let log_theta = theta.log_ball(64).to_f64();
    let ln_n = limit
        .to_f64()
        .filter(|v| v.is_finite())
        .map_or(limit.bits() as f64 * std::f64::consts::LN_2, f64::ln);
    let expected = log_theta / 12.0 * ln_n;
    Ok(CountStatistics {
        theta: theta.clone(),
        limit: limit.clone(),
        count: report.members.len(),
        expected,
        ratio: report.members.len() as f64 / expected,
        complete: report.complete,
    })
}
