//! Partial-quotient sequences, finite or eventually periodic.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `[a0; a1, ..., a_m, period(p_0, ..., p_{L-1})]`.
///
/// `head` always holds `a0`; `period` is empty for finite sequences.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CfTerms {
    head: Vec<BigInt>,
    period: Vec<BigInt>,
}

impl CfTerms {
    pub fn new(head: Vec<BigInt>, period: Vec<BigInt>) -> Result<Self> {
        if head.is_empty() {
            return Err(Error::input("continued fraction needs a0"));
        }
        for (i, a) in head.iter().enumerate().skip(1) {
            if !a.is_positive() {
                return Err(Error::input(format!("partial quotient a_{i} = {a} must be >= 1")));
            }
        }
        for (j, a) in period.iter().enumerate() {
            if !a.is_positive() {
                return Err(Error::input(format!(
                    "periodic partial quotient #{j} = {a} must be >= 1"
                )));
            }
        }
        Ok(CfTerms { head, period })
    }

    pub fn finite(terms: Vec<BigInt>) -> Result<Self> {
        CfTerms::new(terms, Vec::new())
    }

    pub fn from_i64(head: &[i64], period: &[i64]) -> Result<Self> {
        CfTerms::new(
            head.iter().map(|&v| BigInt::from(v)).collect(),
            period.iter().map(|&v| BigInt::from(v)).collect(),
        )
    }

    pub fn head(&self) -> &[BigInt] {
        &self.head
    }

    pub fn period(&self) -> &[BigInt] {
        &self.period
    }

    pub fn is_periodic(&self) -> bool {
        !self.period.is_empty()
    }

    /// Number of terms for finite sequences, `None` when infinite.
    pub fn finite_len(&self) -> Option<usize> {
        (!self.is_periodic()).then_some(self.head.len())
    }

    /// `a_k`, or `None` past the end of a finite sequence.
    pub fn term(&self, k: usize) -> Option<BigInt> {
        if k < self.head.len() {
            return Some(self.head[k].clone());
        }
        if self.period.is_empty() {
            return None;
        }
        let j = (k - self.head.len()) % self.period.len();
        Some(self.period[j].clone())
    }

    pub fn prefix(&self, n: usize) -> Vec<BigInt> {
        (0..n).map_while(|k| self.term(k)).collect()
    }

    /// Canonical finite form: a trailing 1 folds into its predecessor.
    pub fn canonical_finite(mut terms: Vec<BigInt>) -> Vec<BigInt> {
        while terms.len() >= 2 && terms.last().is_some_and(|t| t.is_one()) {
            terms.pop();
            if let Some(last) = terms.last_mut() {
                *last += 1;
            }
        }
        terms
    }
}

fn join(v: &[BigInt]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for CfTerms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.head[0])?;
        let rest = &self.head[1..];
        if !rest.is_empty() || self.is_periodic() {
            write!(f, ";")?;
        }
        write!(f, "{}", join(rest))?;
        if self.is_periodic() {
            if !rest.is_empty() {
                write!(f, ",")?;
            }
            write!(f, "period({})", join(&self.period))?;
        }
        write!(f, "]")
    }
}

impl FromStr for CfTerms {
    type Err = Error;

    /// `[a0;a1,a2,...]`, optionally ending in `period(x,y,...)`.
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = |why: &str| Error::parse(format!("bad continued fraction `{s}`: {why}"));
        let inner = s
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| bad("expected [a0;a1,...]"))?;
        let (a0, rest) = match inner.split_once(';') {
            Some((a, r)) => (a, r),
            None => (inner, ""),
        };
        let parse_list = |t: &str| -> Result<Vec<BigInt>> {
            if t.is_empty() {
                return Ok(Vec::new());
            }
            t.split(',')
                .map(|x| x.parse::<BigInt>().map_err(|_| bad(&format!("`{x}` is not an integer"))))
                .collect()
        };
        let (pre, period) = match rest.find("period(") {
            Some(pos) => {
                let per = rest[pos + "period(".len()..]
                    .strip_suffix(')')
                    .ok_or_else(|| bad("period(...) must close the list"))?;
                let pre = rest[..pos].trim_end_matches(',');
                (pre, parse_list(per)?)
            }
            None => (rest, Vec::new()),
        };
        if period.is_empty() && rest.contains("period(") {
            return Err(bad("empty period"));
        }
        let mut head = vec![a0.parse::<BigInt>().map_err(|_| bad("a0 is not an integer"))?];
        head.extend(parse_list(pre)?);
        CfTerms::new(head, period)
    }
}

#[derive(Serialize, Deserialize)]
struct CfTermsJson {
    preperiod: Vec<String>,
    period: Vec<String>,
}

impl Serialize for CfTerms {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CfTermsJson {
            preperiod: self.head.iter().map(|x| x.to_string()).collect(),
            period: self.period.iter().map(|x| x.to_string()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CfTerms {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CfTermsJson::deserialize(d)?;
        let conv = |v: Vec<String>| -> std::result::Result<Vec<BigInt>, D::Error> {
            v.iter()
                .map(|x| x.parse::<BigInt>().map_err(serde::de::Error::custom))
                .collect()
        };
        CfTerms::new(conv(j.preperiod)?, conv(j.period)?).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        for s in ["[1;period(2)]", "[0;2,period(4)]", "[3;7,15,1,292]", "[5]", "[1;period(3,1)]"] {
            let t: CfTerms = s.parse().unwrap();
            assert_eq!(t.to_string(), s);
        }
    }

    #[test]
    fn periodic_indexing() {
        let t: CfTerms = "[0;2,period(4,7)]".parse().unwrap();
        let got: Vec<i64> = t.prefix(7).iter().map(|x| x.try_into().unwrap()).collect();
        assert_eq!(got, vec![0, 2, 4, 7, 4, 7, 4]);
    }

    #[test]
    fn rejects_nonpositive_tail() {
        assert!("[1;0,2]".parse::<CfTerms>().is_err());
        assert!("[1;period(0)]".parse::<CfTerms>().is_err());
        assert!("[-3;1,2]".parse::<CfTerms>().is_ok());
    }

    #[test]
    fn canonical_finite_folds_trailing_one() {
        let v = CfTerms::canonical_finite(vec![2.into(), 3.into(), 1.into()]);
        assert_eq!(v, vec![BigInt::from(2), BigInt::from(4)]);
    }

    #[test]
    fn json_shape() {
        let t: CfTerms = "[0;2,period(4)]".parse().unwrap();
        let j = serde_json::to_string(&t).unwrap();
        assert_eq!(j, r#"{"preperiod":["0","2"],"period":["4"]}"#);
        let back: CfTerms = serde_json::from_str(&j).unwrap();
        assert_eq!(back, t);
    }
}
