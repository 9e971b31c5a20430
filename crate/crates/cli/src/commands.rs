//! Subcommand implementations.

use std::io::Read;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rootfrac::atypical::{
    classify_continuant, enumerate_both, enumerate_continuant, replay_report, scan_direct, verify_rational_bound,
    Classification, EnumerationOptions, EnumerationReport, FilterOutcome, REPORT_SCHEMA,
};
use rootfrac::contfrac::{cf_of_quadratic, cf_of_rational, cf_of_real, CFExpansion};
use rootfrac::families::{
    count_statistics, identity_scan, infinite_family_c, empty_family_c, sample_exp_quadratic, verify_empty,
    verify_infinite, verify_root2, Check, FamilyParams, FamilyVariant,
};
use rootfrac::mtheta::{m_theta, MembershipOptions, ThetaContext, ThetaSpec};
use rootfrac::realnum::{Ball, Exact, FloorDecision, QuadIrr, RealSpec};
use rootfrac::{Error, Result};
use serde::Serialize;

use crate::args::{parse_big, parse_decimal, parse_decimal_range, parse_params, parse_range, Case, Cli, Command, Format, Method};
use crate::output::{ball_cells, opt, Output, UNDECIDED, VERIFICATION_FAILED};

const MTHETA_SCHEMA: &str = "rootfrac.mtheta/1";
const CF_SCHEMA: &str = "rootfrac.cf/1";
const VERIFY_SCHEMA: &str = "rootfrac.verify/1";
const STATS_SCHEMA: &str = "rootfrac.stats/1";
const CLASSIFY_SCHEMA: &str = "rootfrac.classify/1";
const REPLAY_SCHEMA: &str = "rootfrac.replay/1";

fn input<T>(r: std::result::Result<T, String>) -> Result<T> {
    r.map_err(Error::input)
}

fn theta(s: &str) -> Result<ThetaSpec> {
    s.parse()
}

fn to_u64(v: &BigInt, what: &str) -> Result<u64> {
    u64::try_from(v).map_err(|_| Error::input(format!("{what} = {v} does not fit in 64 bits")))
}

pub fn run(cli: &Cli) -> Result<Output> {
    let opts = EnumerationOptions {
        membership: MembershipOptions {
            policy: cli.common.policy(),
            paranoid: cli.common.paranoid,
        },
    };
    match &cli.command {
        Command::Mtheta { theta: t, n } => mtheta(&theta(t)?, n, &opts),
        Command::Atypical { theta: t, limit, method } => atypical(&theta(t)?, limit, *method, &opts),
        Command::Cf { value, terms } => cf(value, *terms, &opts),
        Command::Verify {
            case,
            params,
            depth,
            limit,
        } => verify(*case, params, *depth, limit.as_deref(), &opts),
        Command::Stats {
            samples,
            limit,
            log_range,
            force_theta,
        } => stats(*samples, limit, log_range, force_theta, cli.common.seed, &opts),
        Command::Classify { theta: t, k, delta } => classify(&theta(t)?, k, delta.as_deref(), &opts),
        Command::Replay { input } => replay(input),
    }
}

#[derive(Serialize)]
struct MthetaRow {
    n: i64,
    m_theta: Option<String>,
    m_prime: Option<String>,
    typical: Option<String>,
    atypical: Option<bool>,
    status: String,
}

#[derive(Serialize)]
struct MthetaReport {
    schema: &'static str,
    theta: ThetaSpec,
    rows: Vec<MthetaRow>,
}

fn mtheta_row(ctx: &ThetaContext, opts: &EnumerationOptions, n: i64) -> Result<MthetaRow> {
    let nb = BigInt::from(n);
    let mut notes = Vec::new();
    let m_prime = match ctx.m_prime_decision(&nb)? {
        FloorDecision::Undecided { .. } => {
            notes.push("M' undecided");
            None
        }
        d => d.value().cloned(),
    };
    let typical = match ctx.typical(&nb) {
        Ok(v) => Some(v),
        Err(e) if e.is_undecided() => {
            notes.push("typical value undecided");
            None
        }
        Err(e) => return Err(e),
    };
    let (m, atypical) = if n > 0 {
        let m = match m_theta(ctx.theta(), &nb, ctx.policy()) {
            Ok(v) => Some(v),
            Err(Error::Domain(_)) => {
                notes.push("M_theta undefined: theta^(1/n) is an integer");
                None
            }
            Err(e) if e.is_undecided() => {
                notes.push("M_theta undecided");
                None
            }
            Err(e) => return Err(e),
        };
        let a = match ctx.is_atypical(&nb, opts.membership.paranoid) {
            Ok(r) => Some(r.atypical),
            Err(e) if e.is_undecided() => {
                notes.push("membership undecided");
                None
            }
            Err(e) => return Err(e),
        };
        (m, a)
    } else {
        let a = match (&m_prime, &typical) {
            (Some(a), Some(b)) => Some(a != b),
            _ => None,
        };
        (None, a)
    };
    let undecided = notes.iter().any(|s| s.ends_with("undecided"));
    Ok(MthetaRow {
        n,
        m_theta: m.map(|v| v.to_string()),
        m_prime: m_prime.map(|v| v.to_string()),
        typical: typical.map(|v| v.to_string()),
        atypical,
        status: if notes.is_empty() {
            "ok".into()
        } else if undecided {
            format!("undecided: {}", notes.join("; "))
        } else {
            notes.join("; ")
        },
    })
}

fn mtheta(theta: &ThetaSpec, n: &str, opts: &EnumerationOptions) -> Result<Output> {
    let (a, b) = input(parse_range(n))?;
    let ctx = ThetaContext::new(theta.clone(), *opts.policy());
    let rows: Vec<MthetaRow> = (a..=b)
        .into_par_iter()
        .filter(|&n| n != 0)
        .map(|n| mtheta_row(&ctx, opts, n))
        .collect::<Result<_>>()?;
    let undecided = rows.iter().any(|r| r.status.starts_with("undecided"));
    let report = MthetaReport {
        schema: MTHETA_SCHEMA,
        theta: theta.clone(),
        rows,
    };
    let mut out = Output::new(&report, Format::Json).columns(&["n", "m_theta", "m_prime", "typical", "atypical", "status"]);
    for r in &report.rows {
        out.row(vec![
            r.n.to_string(),
            opt(&r.m_theta),
            opt(&r.m_prime),
            opt(&r.typical),
            opt(&r.atypical),
            r.status.clone(),
        ]);
    }
    Ok(out.code(if undecided { UNDECIDED } else { 0 }))
}

fn continuant_applies(theta: &ThetaSpec, opts: &EnumerationOptions) -> Result<bool> {
    Ok(!theta.log_is_rational() && theta.lt_exp(3, opts.policy())?)
}

fn atypical(theta: &ThetaSpec, limit: &str, method: Method, opts: &EnumerationOptions) -> Result<Output> {
    let limit = input(parse_big(limit))?;
    let method = match method {
        Method::Auto if continuant_applies(theta, opts)? => Method::Continuant,
        Method::Auto => Method::Direct,
        m => m,
    };
    let report = match method {
        Method::Continuant => enumerate_continuant(theta, &limit, opts)?,
        Method::Direct => scan_direct(theta, to_u64(&limit, "limit")?, opts)?,
        _ => enumerate_both(theta, to_u64(&limit, "limit")?, opts)?,
    };
    Ok(enumeration_output(&report))
}

fn enumeration_output(report: &EnumerationReport) -> Output {
    let mut out = Output::new(report, Format::Json).columns(&["n", "k", "c", "via", "precision_bits"]);
    for cert in &report.certificates {
        let d = cert.decomposition.as_ref();
        out.row(vec![
            cert.n.to_string(),
            opt(&d.map(|d| d.k)),
            opt(&d.map(|d| d.c.clone())),
            serde_json::to_value(cert.membership.via)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            opt(&cert.membership.precision_bits),
        ]);
    }
    out.code(if report.complete { 0 } else { UNDECIDED })
}

#[derive(Serialize)]
struct CfRow {
    k: usize,
    a: String,
    #[serde(rename = "A")]
    num: String,
    #[serde(rename = "B")]
    den: String,
    lambda: Option<Ball>,
    lambda_exact: Option<QuadIrr>,
    coarse: Option<bool>,
}

#[derive(Serialize)]
struct CfReport {
    schema: &'static str,
    value: RealSpec,
    requested: usize,
    certified_upto: Option<usize>,
    complete: bool,
    expansion: CFExpansion,
    rows: Vec<CfRow>,
}

fn cf(value: &str, terms: usize, opts: &EnumerationOptions) -> Result<Output> {
    let x: RealSpec = value.parse()?;
    x.validate()?;
    let cf = match x.exact() {
        Some(Exact::Quadratic(q)) => cf_of_quadratic(&q)?,
        Some(Exact::Rational(r)) => cf_of_rational(&r),
        None => cf_of_real(&x, terms, opts.policy())?,
    };
    let finite = x.exact().is_some();
    let last = cf.known_len().map_or(terms, |l| terms.min(l - 1));
    let convs = cf.convergents_upto(last)?;
    let prec = opts.policy().start_bits;
    let rows: Vec<CfRow> = convs
        .into_iter()
        .map(|c| {
            let lam = (c.k >= 1).then(|| cf.lambda(c.k, prec).ok()).flatten();
            Ok(CfRow {
                k: c.k,
                a: cf.term(c.k)?.to_string(),
                num: c.num.to_string(),
                den: c.den.to_string(),
                coarse: lam.as_ref().map(|l| l.coarse),
                lambda_exact: lam.as_ref().and_then(|l| l.exact.clone()),
                lambda: lam.map(|l| l.ball),
            })
        })
        .collect::<Result<_>>()?;
    let complete = finite || last >= terms;
    let report = CfReport {
        schema: CF_SCHEMA,
        value: x,
        requested: terms,
        certified_upto: cf.certified_upto(),
        complete,
        expansion: cf,
        rows,
    };
    let mut out = Output::new(&report, Format::Json).columns(&["k", "a", "A", "B", "lambda", "±", "flag"]);
    for r in &report.rows {
        let [mid, rad] = r.lambda.as_ref().map_or([String::new(), String::new()], ball_cells);
        let flag = match (&r.lambda_exact, r.coarse) {
            (Some(_), _) => "exact",
            (None, Some(true)) => "coarse",
            _ => "",
        };
        out.row(vec![r.k.to_string(), r.a.clone(), r.num.clone(), r.den.clone(), mid, rad, flag.into()]);
    }
    Ok(out.code(if complete { 0 } else { UNDECIDED }))
}

#[derive(Serialize)]
struct VerifyReport {
    schema: &'static str,
    case: Case,
    pass: bool,
    checks: Vec<Check>,
    details: serde_json::Value,
}

fn check(name: &str, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

fn param<'a>(params: &'a [(String, String)], key: &str) -> Option<&'a str> {
    params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn family_from_params(params: &[(String, String)], variant: FamilyVariant, default_c: u64) -> Result<FamilyParams> {
    let tag = match variant {
        FamilyVariant::Empty => "empty",
        FamilyVariant::Infinite => "infinite",
    };
    let fp: FamilyParams = if let Some(f) = param(params, "family") {
        f.parse()?
    } else if let Some(a) = param(params, "a") {
        format!("{tag}:a={a}").parse()?
    } else {
        let c = match param(params, "c") {
            Some(c) => c.parse().map_err(|_| Error::input(format!("c = {c} is not a positive integer")))?,
            None => default_c,
        };
        match variant {
            FamilyVariant::Empty => empty_family_c(c)?,
            FamilyVariant::Infinite => infinite_family_c(c)?,
        }
    };
    if fp.variant != variant {
        return Err(Error::input(format!("{fp} is not a {tag} family")));
    }
    Ok(fp)
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable")
}

fn verify(
    case: Case,
    params: &str,
    depth: Option<usize>,
    limit: Option<&str>,
    opts: &EnumerationOptions,
) -> Result<Output> {
    let params = input(parse_params(params))?;
    let limit = limit.map(|l| input(parse_big(l)).and_then(|v| to_u64(&v, "limit"))).transpose()?;
    let (checks, details) = match case {
        Case::Log2Endpoints => log2_endpoints(opts)?,
        Case::Root2Identity => {
            let n_max = limit.unwrap_or(10_000);
            let id = identity_scan(&theta("exp-quadratic:(0+1*sqrt(2))/1")?, n_max, opts.policy())?;
            let fam = verify_root2(depth.unwrap_or(25), n_max, opts)?;
            let en = enumerate_continuant(&fam.theta, &BigInt::from(10u64.pow(12)), opts)?;
            let passed = en.candidates.iter().filter(|c| c.outcome != FilterOutcome::Rejected).count();
            let mut checks = vec![check(
                "identity",
                id.pass,
                format!(
                    "M'(n) = floor(n/sqrt 2 - 1/2) and M'(-n) = -M'(n) - 2 for 1 <= |n| <= {n_max}: {} mismatches, {} reflection failures",
                    id.mismatches.len(),
                    id.reflection_failures.len()
                ),
            )];
            checks.extend(fam.checks.iter().cloned());
            checks.push(check(
                "no candidates to 1e12",
                passed == 0 && en.members.is_empty() && en.complete,
                format!("{} continuants examined, {passed} passed the lambda filter", en.candidates_examined),
            ));
            (checks, serde_json::json!({ "identity": id, "family": fam, "enumeration": en }))
        }
        Case::FamilyEmpty => {
            let fp = family_from_params(&params, FamilyVariant::Empty, 1)?;
            let rep = verify_empty(&fp, depth.unwrap_or(25), limit.unwrap_or(10_000), opts)?;
            (rep.checks.clone(), to_value(&rep))
        }
        Case::FamilyInfinite => {
            let fp = family_from_params(&params, FamilyVariant::Infinite, 4)?;
            let rep = verify_infinite(&fp, depth.unwrap_or(20), opts)?;
            (rep.checks.clone(), to_value(&rep))
        }
        Case::RationalBound => {
            let int = |key: &str, default: Option<&str>| -> Result<BigInt> {
                let v = param(&params, key)
                    .or(default)
                    .ok_or_else(|| Error::input(format!("rational-bound needs {key}=<int>")))?;
                input(parse_big(v))
            };
            let (p, q) = (int("p", None)?, int("q", Some("1"))?);
            let margin = to_u64(&int("margin", Some("100"))?, "margin")?;
            let rep = verify_rational_bound(&p, &q, margin, opts)?;
            let checks = vec![
                check(
                    "no member at or past p^2/(6q)",
                    rep.violations.is_empty(),
                    format!("bound {}, members {:?}", rep.bound, rep.members.iter().map(|m| m.to_string()).collect::<Vec<_>>()),
                ),
                check("scan complete", rep.complete, format!("[1, {}]", rep.scan_limit)),
            ];
            (checks, to_value(&rep))
        }
    };
    let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
    let report = VerifyReport {
        schema: VERIFY_SCHEMA,
        case,
        pass,
        checks,
        details,
    };
    let mut out = Output::new(&report, Format::Json).columns(&["check", "pass", "detail"]);
    for c in &report.checks {
        out.row(vec![c.name.clone(), c.pass.to_string(), c.detail.clone()]);
    }
    Ok(out.code(if pass { 0 } else { VERIFICATION_FAILED }))
}

fn log2_endpoints(opts: &EnumerationOptions) -> Result<(Vec<Check>, serde_json::Value)> {
    let two = ThetaSpec::rational(2, 1)?;
    let rep = enumerate_continuant(&two, &BigInt::from(10u64.pow(15)), opts)?;
    let want = [BigInt::from(1), BigInt::from(777_451_915_729_368u64)];
    let mut checks = vec![check(
        "members",
        rep.members == want && rep.complete,
        format!("{:?}", rep.members.iter().map(|m| m.to_string()).collect::<Vec<_>>()),
    )];
    let w = opts.policy().start_bits;
    let six_over_log = two.log_ball(w + 16).recip(w + 16).expect("log 2 > 0").mul_int(&BigInt::from(6), w);
    let r = |p: i64, q: i64| Ball::from_rational(&BigRational::new(p.into(), q.into()), w);
    checks.push(check(
        "8.65 < 6/log 2",
        six_over_log.gt(&r(865, 100)),
        six_over_log.display_sig(12),
    ));
    let first = rep.candidates.iter().find(|c| c.k == 1 && c.c == BigInt::from(1));
    checks.push(check(
        "6/log 2 < lambda_2 < 8.73",
        first.is_some_and(|c| c.comparison.exceeds == Some(true) && c.comparison.lambda.lt(&r(873, 100))),
        first.map_or("lambda_2 not examined".into(), |c| c.comparison.lambda.display_sig(12)),
    ));
    let passed: Vec<usize> = rep
        .candidates
        .iter()
        .filter(|c| c.outcome == FilterOutcome::Passed)
        .map(|c| c.k)
        .collect();
    checks.push(check(
        "lambda filter",
        passed == [1, 18],
        format!("passing k = {passed:?}: lambda_2 and lambda_36 only, none of lambda_4..lambda_34"),
    ));
    checks.push(check("replay", replay_report(&rep)?, "every certificate reproduces"));
    Ok((checks, to_value(&rep)))
}

#[derive(Serialize)]
struct StatsRow {
    sample: String,
    theta: String,
    limit: String,
    count: Option<usize>,
    expected: Option<f64>,
    ratio: Option<f64>,
    complete: bool,
    error: Option<String>,
}

#[derive(Serialize)]
struct StatsReport {
    schema: &'static str,
    seed: u64,
    log_range: String,
    rows: Vec<StatsRow>,
    aggregate: StatsRow,
}

fn fixed(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| format!("{v:.6}"))
}

fn stats(
    samples: usize,
    limit: &str,
    log_range: &str,
    force: &[String],
    seed: u64,
    opts: &EnumerationOptions,
) -> Result<Output> {
    let limit = input(parse_big(limit))?;
    let (lo, hi) = input(parse_decimal_range(log_range))?;
    let three = input(parse_decimal("3"))?;
    if lo < BigRational::from_integer(0.into()) || hi > three {
        return Err(Error::input(format!("log range {log_range} must lie inside 0..3")));
    }
    let mut thetas: Vec<(String, ThetaSpec)> = force
        .iter()
        .map(|t| Ok(("forced".to_string(), theta(t)?)))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    thetas.extend((0..samples).map(|i| (i.to_string(), sample_exp_quadratic(&mut rng, &lo, &hi))));
    let rows: Vec<StatsRow> = thetas
        .par_iter()
        .map(|(label, t)| match count_statistics(t, &limit, opts) {
            Ok(s) => StatsRow {
                sample: label.clone(),
                theta: t.to_string(),
                limit: limit.to_string(),
                count: Some(s.count),
                expected: Some(s.expected),
                ratio: Some(s.ratio),
                complete: s.complete,
                error: None,
            },
            Err(e) => StatsRow {
                sample: label.clone(),
                theta: t.to_string(),
                limit: limit.to_string(),
                count: None,
                expected: None,
                ratio: None,
                complete: false,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let ok: Vec<&StatsRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    let count: usize = ok.iter().filter_map(|r| r.count).sum();
    let expected: f64 = ok.iter().filter_map(|r| r.expected).sum();
    let errors = rows.len() - ok.len();
    let aggregate = StatsRow {
        sample: "aggregate".into(),
        theta: String::new(),
        limit: limit.to_string(),
        count: Some(count),
        expected: Some(expected),
        ratio: (expected > 0.0).then(|| count as f64 / expected),
        complete: rows.iter().all(|r| r.complete),
        error: (errors > 0).then(|| format!("{errors} samples failed")),
    };
    let report = StatsReport {
        schema: STATS_SCHEMA,
        seed,
        log_range: log_range.to_string(),
        rows,
        aggregate,
    };
    let mut out = Output::new(&report, Format::Csv)
        .columns(&["sample", "theta", "limit", "count", "expected", "ratio", "complete", "error"]);
    for r in report.rows.iter().chain([&report.aggregate]) {
        out.row(vec![
            r.sample.clone(),
            r.theta.clone(),
            r.limit.clone(),
            opt(&r.count),
            fixed(r.expected),
            fixed(r.ratio),
            r.complete.to_string(),
            opt(&r.error),
        ]);
    }
    Ok(out)
}

#[derive(Serialize)]
struct ClassifyReport {
    schema: &'static str,
    theta: ThetaSpec,
    rows: Vec<Classification>,
}

fn classify(theta: &ThetaSpec, k: &str, delta: Option<&str>, opts: &EnumerationOptions) -> Result<Output> {
    let (a, b) = input(parse_range(k))?;
    if a < 1 {
        return Err(Error::input("k must be at least 1"));
    }
    let delta: Option<RealSpec> = delta.map(str::parse).transpose()?;
    let rows: Vec<Classification> = (a as usize..=b as usize)
        .into_par_iter()
        .map(|k| classify_continuant(theta, k, delta.clone(), &opts.membership))
        .collect::<Result<_>>()?;
    let report = ClassifyReport {
        schema: CLASSIFY_SCHEMA,
        theta: theta.clone(),
        rows,
    };
    let mut out =
        Output::new(&report, Format::Json).columns(&["k", "n", "lambda", "±", "threshold", "lemma_applies", "class"]);
    for c in &report.rows {
        let [mid, rad] = ball_cells(&c.comparison.lambda);
        out.row(vec![
            c.k.to_string(),
            c.n.to_string(),
            mid,
            rad,
            c.comparison.threshold.mid().to_sci_string(12),
            c.lemma_applies.to_string(),
            serde_json::to_value(c.class)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
        ]);
    }
    Ok(out)
}

#[derive(Serialize)]
struct ReplayReport {
    schema: &'static str,
    theta: ThetaSpec,
    limit: String,
    members: Vec<String>,
    certificates: usize,
    reproduced: bool,
}

fn replay(path: &str) -> Result<Output> {
    let mut text = String::new();
    if path == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::input(format!("reading standard input: {e}")))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Error::input(format!("reading {path}: {e}")))?;
    }
    let report: EnumerationReport =
        serde_json::from_str(&text).map_err(|e| Error::parse(format!("{path}: {e}")))?;
    if report.schema != REPORT_SCHEMA {
        return Err(Error::Unsupported(format!(
            "schema {} (this build reads {REPORT_SCHEMA})",
            report.schema
        )));
    }
    let reproduced = replay_report(&report)?;
    let out = ReplayReport {
        schema: REPLAY_SCHEMA,
        theta: report.theta.clone(),
        limit: report.limit.to_string(),
        members: report.members.iter().map(|m| m.to_string()).collect(),
        certificates: report.certificates.len(),
        reproduced,
    };
    let mut o = Output::new(&out, Format::Json).columns(&["theta", "members", "certificates", "reproduced"]);
    o.row(vec![
        out.theta.to_string(),
        out.members.join(" "),
        out.certificates.to_string(),
        reproduced.to_string(),
    ]);
    Ok(o.code(if reproduced { 0 } else { VERIFICATION_FAILED }))
}
