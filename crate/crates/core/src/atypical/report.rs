//! Enumeration reports, certificates and their replay.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{compare_lambda, compare_lambda_at, recip_log_expansion, Threshold};
use crate::contfrac::CfTerms;
use crate::error::Result;
use crate::mtheta::{replay_membership, MembershipResult, ThetaSpec};
use crate::realnum::{Ball, RefinePolicy};

/// Version tag carried by every serialized report.
pub const REPORT_SCHEMA: &str = "rootfrac.enumeration/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnumerationMethod {
    Direct,
    Continuant,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterOutcome {
    Passed,
    Rejected,
    Undecided,
}

/// `lambda_k` against a threshold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaComparison {
    pub k: usize,
    pub lambda: Ball,
    pub threshold: Ball,
    /// `lambda_k > threshold`; `None` when undecided at the cap.
    pub exceeds: Option<bool>,
    /// Exact equality, only possible on the exact path.
    pub equal: bool,
    /// `None` on the exact path.
    pub precision_bits: Option<u64>,
    pub exact: bool,
    pub coarse: bool,
}

/// `n = c B_{2k-1}` with `lambda_{2k} > 6c^2/log theta`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    #[serde(with = "crate::serde_big")]
    pub c: BigInt,
    pub k: usize,
    pub comparison: LambdaComparison,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtypicalCertificate {
    #[serde(with = "crate::serde_big")]
    pub n: BigInt,
    pub decomposition: Option<Decomposition>,
    pub membership: MembershipResult,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub k: usize,
    #[serde(with = "crate::serde_big")]
    pub c: BigInt,
    #[serde(with = "crate::serde_big")]
    pub n: BigInt,
    pub comparison: LambdaComparison,
    pub outcome: FilterOutcome,
    /// Membership of `n`, when the filter let it through.
    pub atypical: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub schema: String,
    pub theta: ThetaSpec,
    #[serde(with = "crate::serde_big")]
    pub limit: BigInt,
    pub method: EnumerationMethod,
    #[serde(with = "crate::serde_big::vec")]
    pub members: Vec<BigInt>,
    pub certificates: Vec<AtypicalCertificate>,
    /// Continuant candidates in `(k, c)` order; empty for a direct scan.
    pub candidates: Vec<CandidateRecord>,
    pub candidates_examined: u64,
    #[serde(with = "crate::serde_big::vec")]
    pub undecided: Vec<BigInt>,
    pub complete: bool,
    /// The expansion of `2/log theta` the candidates came from.
    pub expansion: Option<CfTerms>,
    pub notes: Vec<String>,
}

impl EnumerationReport {
    pub(crate) fn new(theta: &ThetaSpec, limit: BigInt, method: EnumerationMethod) -> Self {
        EnumerationReport {
            schema: REPORT_SCHEMA.to_string(),
            theta: theta.clone(),
            limit,
            method,
            members: Vec::new(),
            certificates: Vec::new(),
            candidates: Vec::new(),
            candidates_examined: 0,
            undecided: Vec::new(),
            complete: true,
            expansion: None,
            notes: Vec::new(),
        }
    }

    pub(crate) fn push_member(&mut self, decomposition: Option<Decomposition>, m: MembershipResult) {
        self.members.push(m.n.clone());
        self.certificates.push(AtypicalCertificate {
            n: m.n.clone(),
            decomposition,
            membership: m,
        });
    }

    pub(crate) fn finish(&mut self) {
        self.members.sort();
        self.members.dedup();
        self.certificates.sort_by(|a, b| a.n.cmp(&b.n));
        self.certificates.dedup_by(|a, b| a.n == b.n);
        self.undecided.sort();
        self.undecided.dedup();
        if !self.undecided.is_empty() {
            self.complete = false;
        }
    }
}

fn six_c_squared(c: &BigInt) -> BigRational {
    BigRational::from_integer(BigInt::from(6) * c * c)
}

/// Recomputes a certificate: the membership decision at its recorded
/// precision and, when present, the `lambda` comparison bit for bit.
pub fn replay_certificate(theta: &ThetaSpec, cert: &AtypicalCertificate) -> Result<bool> {
    if cert.n != cert.membership.n || !cert.membership.atypical {
        return Ok(false);
    }
    if !replay_membership(theta, &cert.membership)? {
        return Ok(false);
    }
    let Some(d) = &cert.decomposition else {
        return Ok(true);
    };
    let policy = RefinePolicy::default();
    let cf = recip_log_expansion(theta, 2, &cert.n, &policy)?;
    if &d.c * cf.convergent(2 * d.k - 1)?.den != cert.n {
        return Ok(false);
    }
    let thr = Threshold::OverLog {
        theta: theta.clone(),
        scale: six_c_squared(&d.c),
    };
    let again = match d.comparison.precision_bits {
        Some(w) => compare_lambda_at(&cf, 2 * d.k, &thr, w)?,
        None => compare_lambda(&cf, 2 * d.k, &thr, &policy)?,
    };
    Ok(again == d.comparison && again.exceeds == Some(true))
}

/// Replays every certificate in a report.
pub fn replay_report(r: &EnumerationReport) -> Result<bool> {
    for c in &r.certificates {
        if !replay_certificate(&r.theta, c)? {
            return Ok(false);
        }
    }
    Ok(r.members.len() == r.certificates.len())
}
