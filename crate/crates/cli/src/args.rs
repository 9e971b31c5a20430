//! Command-line grammar: subcommands, shared flags, and value parsers.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rootfrac::realnum::RefinePolicy;
use serde::Serialize;

#[derive(Parser, Debug, Serialize)]
#[command(name = "rootfrac", version, about = "Certified floor(1/frac(theta^(1/n))) and its atypical set")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Serialize)]
pub struct Common {
    /// Starting working precision in bits.
    #[arg(long, global = true, env = "ROOTFRAC_PRECISION_START", default_value_t = 64)]
    pub precision_start: u64,
    /// Precision cap in bits; comparisons still open at the cap are reported undecided.
    #[arg(long, global = true, env = "ROOTFRAC_PRECISION_CAP", default_value_t = 16384)]
    pub precision_cap: u64,
    /// Output format; each command has its own default.
    #[arg(long, global = true, env = "ROOTFRAC_FORMAT")]
    pub format: Option<Format>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "ROOTFRAC_JOBS")]
    pub jobs: Option<usize>,
    /// Seed for sampling commands.
    #[arg(long, global = true, env = "ROOTFRAC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Cross-check every membership decision through all three routes.
    #[arg(long, global = true, env = "ROOTFRAC_PARANOID")]
    pub paranoid: bool,
    /// Print the parsed run configuration as JSON and exit.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub print_config: bool,
}

impl Common {
    pub fn policy(&self) -> RefinePolicy {
        RefinePolicy {
            start_bits: self.precision_start,
            cap_bits: self.precision_cap,
            ..RefinePolicy::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Continuant enumeration when it applies, else a direct scan.
    Auto,
    Direct,
    Continuant,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    Log2Endpoints,
    Root2Identity,
    FamilyEmpty,
    FamilyInfinite,
    RationalBound,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// M_theta(n), M'_theta(n), the typical value and membership for a range of n.
    Mtheta {
        #[arg(long)]
        theta: String,
        /// `a..b` (inclusive) or a single integer; n = 0 is skipped.
        #[arg(long, allow_hyphen_values = true)]
        n: String,
    },
    /// Members of the atypical set up to a limit.
    Atypical {
        #[arg(long)]
        theta: String,
        /// Upper limit, e.g. `1e15` or `1000`.
        #[arg(long)]
        limit: String,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Partial quotients, convergents and lambda_k of a value.
    Cf {
        /// `2/log(<theta>)`, `1/log(<theta>)`, `quad:(a+b*sqrt(d))/c`, `rat:p/q`, ...
        #[arg(long)]
        value: String,
        /// Last index to certify.
        #[arg(long, default_value_t = 20)]
        terms: usize,
    },
    /// Named verification scenarios.
    Verify {
        #[arg(long, value_enum)]
        case: Case,
        /// Comma-separated `key=value` pairs, e.g. `c=4` or `p=10,q=1`.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        limit: Option<String>,
    },
    /// Atypical counts for sampled theta beside (log theta / 12) ln N.
    Stats {
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value = "1e12")]
        limit: String,
        /// Range of log theta to sample, inside (0, 3).
        #[arg(long, default_value = "0..3")]
        log_range: String,
        /// Extra theta to include ahead of the samples.
        #[arg(long)]
        force_theta: Vec<String>,
    },
    /// Classify continuants B_{2k-1} as typical, good denominators, or atypical.
    Classify {
        #[arg(long)]
        theta: String,
        /// `k` or `a..b`.
        #[arg(long)]
        k: String,
        /// delta in (0, log theta); defaults to (log theta)/2.
        #[arg(long)]
        delta: Option<String>,
    },
    /// Re-check every certificate in a stored enumeration report.
    Replay {
        /// Path to the JSON report, or `-` for standard input.
        #[arg(long)]
        input: String,
    },
}

/// Parses `1000`, `1e15`, `2.5e3` or `10^12` to an integer.
pub fn parse_big(s: &str) -> Result<BigInt, String> {
    let v = parse_decimal(s)?;
    if !v.is_integer() {
        return Err(format!("`{}` is not an integer, e.g. 1000, 1e15 or 10^12", s.trim()));
    }
    Ok(v.to_integer())
}

/// Parses `p/q`, `2.5`, `1e15` or `10^12` exactly.
pub fn parse_decimal(s: &str) -> Result<BigRational, String> {
    let s = s.trim().replace('_', "");
    let bad = || format!("`{s}` is not a number, e.g. 1000, 2.5, 1e15, 10^12 or 7/2");
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q == BigInt::from(0) {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((b, e)) = s.split_once('^') {
        let b: BigInt = b.parse().map_err(|_| bad())?;
        let e: u32 = e.parse().map_err(|_| bad())?;
        return Ok(BigRational::from_integer(b.pow(e)));
    }
    let (mant, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m.to_string(), e.parse::<i32>().map_err(|_| bad())?),
        None => (s.clone(), 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((&mant, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(digits * ten.pow(scale as u32))
    } else {
        BigRational::new(digits, ten.pow((-scale) as u32))
    })
}

/// Parses `a..b` with decimal endpoints.
pub fn parse_decimal_range(s: &str) -> Result<(BigRational, BigRational), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("`{s}` is not a range a..b"))?;
    let (a, b) = (parse_decimal(a)?, parse_decimal(b.trim_start_matches('='))?);
    if a >= b {
        return Err(format!("empty range {s}"));
    }
    Ok((a, b))
}

/// Parses `a..b`, `a..=b` (both inclusive) or a single integer.
pub fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let s = s.trim();
    let bad = || format!("`{s}` is not a range a..b");
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (s, s),
    };
    let a: i64 = a.trim().parse().map_err(|_| bad())?;
    let b: i64 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(format!("empty range {s}"));
    }
    Ok((a, b))
}

/// Splits `k=v` pairs at commas outside brackets.
pub fn parse_params(s: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut push = |cur: &mut String| -> Result<(), String> {
        let t = cur.trim();
        if !t.is_empty() {
            let (k, v) = t.split_once('=').ok_or_else(|| format!("`{t}` is not key=value"))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        cur.clear();
        Ok(())
    };
    for ch in s.chars() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                push(&mut cur)?;
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    push(&mut cur)?;
    Ok(out)
}
