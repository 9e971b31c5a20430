//! `M'_theta(n) = floor(n/log theta - 1/2)` over a symmetric range, and the
//! reflection `M'_theta(-n) = -M'_theta(n) - 2`.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mtheta::{ThetaContext, ThetaSpec};
use crate::realnum::{FloorDecision, RefinePolicy};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub theta: ThetaSpec,
    pub n_max: u64,
    /// `n` in `[-n_max, n_max]`, `n != 0`, with `M'_theta(n)` off the typical value.
    pub mismatches: Vec<i64>,
    /// `n > 0` where the reflection fails or non-integrality is not certified.
    pub reflection_failures: Vec<i64>,
    pub undecided: Vec<i64>,
    pub pass: bool,
}

struct Row {
    n: i64,
    pos_typical: bool,
    neg_typical: bool,
    reflects: bool,
}

fn row(ctx: &ThetaContext, n: i64) -> Result<Row> {
    let p = BigInt::from(n);
    let m = -&p;
    let dp = ctx.m_prime_decision(&p)?;
    let dm = ctx.m_prime_decision(&m)?;
    let (Some(vp), Some(vm)) = (dp.value().cloned(), dm.value().cloned()) else {
        return Err(crate::Error::undecided(ctx.policy().cap_bits, format!("M'_theta(+-{n})")));
    };
    // a strict witness ball certifies that 1/(theta^(1/n) - 1) is not an integer
    let non_integral = matches!(dp, FloorDecision::Decided { witness: Some(_), .. });
    Ok(Row {
        n,
        pos_typical: vp == ctx.typical(&p)?,
        neg_typical: vm == ctx.typical(&m)?,
        reflects: non_integral && vm == -vp - 2,
    })
}

/// Checks the identity and the reflection for `1 <= |n| <= n_max`.
pub fn identity_scan(theta: &ThetaSpec, n_max: u64, policy: &RefinePolicy) -> Result<IdentityReport> {
    let ctx = ThetaContext::new(theta.clone(), *policy);
    let rows: Vec<(i64, Result<Row>)> = (1..=n_max as i64)
        .into_par_iter()
        .map(|n| (n, row(&ctx, n)))
        .collect();
    let mut rep = IdentityReport {
        theta: theta.clone(),
        n_max,
        mismatches: Vec::new(),
        reflection_failures: Vec::new(),
        undecided: Vec::new(),
        pass: false,
    };
    for (n, r) in rows {
        match r {
            Ok(r) => {
                if !r.neg_typical {
                    rep.mismatches.push(-r.n);
                }
                if !r.pos_typical {
                    rep.mismatches.push(r.n);
                }
                if !r.reflects {
                    rep.reflection_failures.push(r.n);
                }
            }
            Err(e) if e.is_undecided() => rep.undecided.push(n),
            Err(e) => return Err(e),
        }
    }
    rep.mismatches.sort();
    rep.pass = rep.mismatches.is_empty() && rep.reflection_failures.is_empty() && rep.undecided.is_empty();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root2_identity_small() {
        let th: ThetaSpec = "exp-quadratic:(0+1*sqrt(2))/1".parse().unwrap();
        let r = identity_scan(&th, 300, &RefinePolicy::default()).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn two_fails_at_one() {
        // n = 1 is atypical for theta = 2 and M'_2(1) = 1 is an exact integer
        let r = identity_scan(&ThetaSpec::rational(2, 1).unwrap(), 20, &RefinePolicy::default()).unwrap();
        assert_eq!(r.mismatches, vec![1]);
        assert!(r.reflection_failures.contains(&1));
    }
}
