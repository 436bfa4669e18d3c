//! Per-level failure schedules.
//!
//! A schedule assigns each tree level `k` a local failure probability `p_k`
//! (the chance that a level-k node or its outgoing link drops the message).
//! Schedules are either generated from a pattern or given level-by-level; the
//! text grammar understood by [`FromStr`] is
//!
//! ```text
//! constant:p=0.1
//! quadratic:p0=0.1
//! geometric:p0=0.1,r=0.5
//! explicit:0.1,0.01,0.0001
//! raw:(0.05,0.1);(0.01,0.02)
//! ```
//!
//! `raw` entries are `(node, link)` pairs combined via
//! [`local_failure_prob`](crate::local_failure_prob).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::triplet::local_failure_prob;

#[derive(Clone, Debug, PartialEq)]
pub enum SchedulePattern {
    /// p_k = p for every level.
    Constant { p: f64 },
    /// p_{k+1} = p_k², starting from p0.
    Quadratic { p0: f64 },
    /// p_{k+1} = r·p_k, starting from p0.
    Geometric { p0: f64, r: f64 },
    /// Explicit list of p_k values.
    Explicit { ps: Vec<f64> },
    /// Per-level (node, link) probabilities; p_k = n_k + l_k − n_k·l_k.
    Raw { pairs: Vec<(f64, f64)> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FailureSchedule {
    pattern: SchedulePattern,
}

fn check_prob(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() && (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(Error::Domain(format!("{what} must lie in [0, 1], got {x}")))
    }
}

impl FailureSchedule {
    pub fn constant(p: f64) -> Result<Self> {
        check_prob(p, "constant failure probability")?;
        Ok(Self { pattern: SchedulePattern::Constant { p } })
    }

    pub fn quadratic(p0: f64) -> Result<Self> {
        check_prob(p0, "initial failure probability")?;
        Ok(Self { pattern: SchedulePattern::Quadratic { p0 } })
    }

    /// `r` is capped at 1 so the produced sequence can never leave [0, 1].
    pub fn geometric(p0: f64, r: f64) -> Result<Self> {
        check_prob(p0, "initial failure probability")?;
        check_prob(r, "geometric ratio")?;
        Ok(Self { pattern: SchedulePattern::Geometric { p0, r } })
    }

    pub fn explicit(ps: Vec<f64>) -> Result<Self> {
        if ps.is_empty() {
            return Err(Error::Domain("explicit schedule must list at least one level".into()));
        }
        for &p in &ps {
            check_prob(p, "explicit failure probability")?;
        }
        Ok(Self { pattern: SchedulePattern::Explicit { ps } })
    }

    pub fn raw(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Domain("raw schedule must list at least one level".into()));
        }
        for &(n, l) in &pairs {
            local_failure_prob(n, l)?;
        }
        Ok(Self { pattern: SchedulePattern::Raw { pairs } })
    }

    pub fn pattern(&self) -> &SchedulePattern {
        &self.pattern
    }

    /// Number of levels the schedule can serve; `None` means unbounded.
    pub fn horizon(&self) -> Option<usize> {
        match &self.pattern {
            SchedulePattern::Explicit { ps } => Some(ps.len()),
            SchedulePattern::Raw { pairs } => Some(pairs.len()),
            _ => None,
        }
    }

    /// Local failure probability at level `k`, or `None` past the horizon.
    ///
    /// Quadratic and geometric values are produced by iterated multiplication
    /// rather than `powi`/`powf`: round-to-nearest of a product `x·r` with
    /// `r ≤ 1` never exceeds `x`, so the sequence is non-increasing even
    /// after it underflows.
    pub fn p(&self, k: usize) -> Option<f64> {
        match &self.pattern {
            SchedulePattern::Constant { p } => Some(*p),
            SchedulePattern::Quadratic { p0 } => {
                let mut p = *p0;
                for _ in 0..k {
                    p *= p;
                }
                Some(p)
            }
            SchedulePattern::Geometric { p0, r } => {
                let mut p = *p0;
                for _ in 0..k {
                    p *= r;
                }
                Some(p)
            }
            SchedulePattern::Explicit { ps } => ps.get(k).copied(),
            SchedulePattern::Raw { pairs } => pairs
                .get(k)
                .map(|&(n, l)| local_failure_prob(n, l).expect("validated at construction")),
        }
    }

    /// Like [`p`](Self::p) but with the node/link split preserved; patterns
    /// given only as p_k are attributed entirely to the link, which leaves
    /// every message-level outcome distribution unchanged.
    pub fn node_link(&self, k: usize) -> Option<(f64, f64)> {
        match &self.pattern {
            SchedulePattern::Raw { pairs } => pairs.get(k).copied(),
            _ => self.p(k).map(|p| (0.0, p)),
        }
    }

    /// Collects p_0..=p_last, or the too-short error naming `height`.
    pub fn take(&self, last: usize, height: usize) -> Result<Vec<f64>> {
        (0..=last)
            .map(|k| {
                self.p(k).ok_or(Error::ScheduleTooShort {
                    available: self.horizon().unwrap_or(0),
                    needed: last + 1,
                    height,
                })
            })
            .collect()
    }

    /// True when p_{k+1} ≤ p_k for all k < `upto` (exact comparisons).
    pub fn is_non_increasing(&self, upto: usize) -> bool {
        let mut prev = match self.p(0) {
            Some(p) => p,
            None => return false,
        };
        for k in 1..=upto {
            match self.p(k) {
                Some(p) if p <= prev => prev = p,
                _ => return false,
            }
        }
        true
    }
}

fn parse_err(input: &str, reason: impl Into<String>) -> Error {
    Error::ScheduleParse { input: input.to_string(), reason: reason.into() }
}

fn parse_f64(s: &str, input: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| parse_err(input, format!("`{}` is not a number", s.trim())))
}

/// Expects `key=value` and returns the parsed value.
fn parse_kv(s: &str, key: &str, input: &str) -> Result<f64> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| parse_err(input, format!("expected `{key}=<number>`, got `{s}`")))?;
    if k.trim() != key {
        return Err(parse_err(input, format!("expected key `{key}`, got `{}`", k.trim())));
    }
    parse_f64(v, input)
}

impl FromStr for FailureSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| parse_err(s, "expected `<kind>:<parameters>`"))?;
        match kind.trim() {
            "constant" => FailureSchedule::constant(parse_kv(rest, "p", s)?),
            "quadratic" => FailureSchedule::quadratic(parse_kv(rest, "p0", s)?),
            "geometric" => {
                let (a, b) = rest
                    .split_once(',')
                    .ok_or_else(|| parse_err(s, "expected `p0=<number>,r=<number>`"))?;
                FailureSchedule::geometric(parse_kv(a, "p0", s)?, parse_kv(b, "r", s)?)
            }
            "explicit" => {
                let ps = rest
                    .split(',')
                    .map(|v| parse_f64(v, s))
                    .collect::<Result<Vec<_>>>()?;
                FailureSchedule::explicit(ps)
            }
            "raw" => {
                let pairs = rest
                    .split(';')
                    .map(|pair| {
                        let inner = pair
                            .trim()
                            .strip_prefix('(')
                            .and_then(|p| p.strip_suffix(')'))
                            .ok_or_else(|| {
                                parse_err(s, format!("expected `(node,link)`, got `{}`", pair.trim()))
                            })?;
                        let (n, l) = inner
                            .split_once(',')
                            .ok_or_else(|| parse_err(s, "raw pair needs two comma-separated numbers"))?;
                        Ok((parse_f64(n, s)?, parse_f64(l, s)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                FailureSchedule::raw(pairs)
            }
            other => Err(parse_err(s, format!("unknown schedule kind `{other}`"))),
        }
        .map_err(|e| match e {
            // Surface range problems found during construction as parse errors:
            // the caller handed us a string, not numbers.
            Error::Domain(reason) => parse_err(s, reason),
            e => e,
        })
    }
}

impl fmt::Display for FailureSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.pattern {
            SchedulePattern::Constant { p } => write!(f, "constant:p={p}"),
            SchedulePattern::Quadratic { p0 } => write!(f, "quadratic:p0={p0}"),
            SchedulePattern::Geometric { p0, r } => write!(f, "geometric:p0={p0},r={r}"),
            SchedulePattern::Explicit { ps } => {
                write!(f, "explicit:")?;
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            SchedulePattern::Raw { pairs } => {
                write!(f, "raw:")?;
                for (i, (n, l)) in pairs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "({n},{l})")?;
                }
                Ok(())
            }
        }
    }
}
