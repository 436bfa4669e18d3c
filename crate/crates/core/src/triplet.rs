//! The per-level error state and its one-step fusion recursion.
//!
//! A level of the relay tree is summarized by three numbers: the Type I
//! (false-alarm) probability `alpha`, the Type II (missed-detection)
//! probability `beta` — both conditioned on the node having data — and the
//! silence probability `q` (the chance a parent hears nothing from a given
//! child at this level). One fusion step maps the triplet at level k to the
//! triplet at level k+1.
//!
//! `alpha` and `beta` are kept in extended-range floats because they shrink
//! doubly exponentially; `q` stays an ordinary f64, which is harmless — once
//! q underflows, every term it feeds is far below working precision.

use crate::error::{Error, Result};
use crate::ext::Ext;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorTriplet {
    pub alpha: Ext,
    pub beta: Ext,
    pub q: f64,
}

fn check_prob(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() && (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(Error::Domain(format!("{what} must lie in [0, 1], got {x}")))
    }
}

/// Probability the node or its outgoing link fails: n + l − n·l.
pub fn local_failure_prob(n: f64, l: f64) -> Result<f64> {
    check_prob(n, "node failure probability")?;
    check_prob(l, "link failure probability")?;
    // Clamp only guards the last-bit rounding of the sum; the true value is
    // 1 − (1−n)(1−l) ∈ [0, 1].
    Ok((n + l - n * l).clamp(0.0, 1.0))
}

/// Silence probability one level up: q² + (1−q²)·p_next.
///
/// A parent hears nothing from a child that either starved (both of its own
/// children silent, q²) or had data but failed to transmit.
pub fn silence_step(q: f64, p_next: f64) -> Result<f64> {
    check_prob(q, "silence probability")?;
    if q >= 1.0 {
        return Err(Error::Domain("silence probability must be < 1".into()));
    }
    check_prob(p_next, "local failure probability")?;
    let q2 = q * q;
    Ok((q2 + (1.0 - q2) * p_next).clamp(0.0, 1.0))
}

impl ErrorTriplet {
    pub fn new(alpha: f64, beta: f64, q: f64) -> Result<Self> {
        check_prob(alpha, "Type I probability")?;
        check_prob(beta, "Type II probability")?;
        Self::from_parts(Ext::from_f64(alpha), Ext::from_f64(beta), q)
    }

    pub fn from_parts(alpha: Ext, beta: Ext, q: f64) -> Result<Self> {
        if alpha + beta >= Ext::ONE {
            return Err(Error::Domain(format!(
                "alpha + beta must be < 1, got {} + {}",
                alpha.sci17(),
                beta.sci17()
            )));
        }
        check_prob(q, "silence probability")?;
        if q >= 1.0 {
            return Err(Error::Domain(
                "silence probability reached 1 (every message lost); the recursion's \
                 1/(1-q) factors are undefined there"
                    .into(),
            ));
        }
        Ok(Self { alpha, beta, q })
    }

    pub fn alpha_f64(&self) -> f64 {
        self.alpha.to_f64()
    }

    pub fn beta_f64(&self) -> f64 {
        self.beta.to_f64()
    }
}

/// Total error mass L = α + β.
pub fn total_error(t: &ErrorTriplet) -> Ext {
    t.alpha + t.beta
}

/// Prior-weighted error prior0·α + (1−prior0)·β.
pub fn weighted_error(t: &ErrorTriplet, prior0: f64) -> Result<Ext> {
    if !(prior0 > 0.0 && prior0 < 1.0) {
        return Err(Error::Domain(format!("prior must lie in (0, 1), got {prior0}")));
    }
    Ok(Ext::from_f64(prior0) * t.alpha + Ext::from_f64(1.0 - prior0) * t.beta)
}

/// One fusion step: the level-(k+1) triplet reached from `t` when the next
/// level's local failure probability is `p_next`.
///
/// Conditioned on the parent having data, it received two messages with
/// probability (1−q)/(1+q) — fused with the unit-threshold likelihood-ratio
/// rule, which is OR-type combining when α ≤ β and AND-type when α > β — and
/// one forwarded message with probability 2q/(1+q). Ties α = β take the
/// OR branch.
pub fn fuse_step(t: &ErrorTriplet, p_next: f64) -> Result<ErrorTriplet> {
    let q = t.q;
    let q_next = silence_step(q, p_next)?;
    let one_minus_q = Ext::from_f64(1.0 - q);
    let two_q = Ext::from_f64(2.0 * q);
    let one_plus_q = Ext::from_f64(1.0 + q);
    let two = Ext::from_f64(2.0);

    // OR combining sends a coordinate x to 2x−x²; AND squares it. The
    // forwarded case leaves both coordinates alone.
    let grow = |x: Ext| (one_minus_q * x * (two - x) + two_q * x) / one_plus_q;
    let square = |x: Ext| (one_minus_q * x * x + two_q * x) / one_plus_q;

    let (alpha_next, beta_next) = if t.alpha <= t.beta {
        (grow(t.alpha), square(t.beta))
    } else {
        (square(t.alpha), grow(t.beta))
    };
    ErrorTriplet::from_parts(alpha_next, beta_next, q_next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn local_failure_examples() {
        assert_eq!(local_failure_prob(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(local_failure_prob(1.0, 0.5).unwrap(), 1.0);
        close(local_failure_prob(0.1, 0.2).unwrap(), 0.28, 1e-15);
        assert!(local_failure_prob(1.1, 0.0).is_err());
        assert!(local_failure_prob(0.1, -0.2).is_err());
    }

    #[test]
    fn silence_examples() {
        assert_eq!(silence_step(0.0, 0.37).unwrap(), 0.37);
        close(silence_step(0.3, 0.0).unwrap(), 0.09, 1e-15);
        close(silence_step(0.1, 0.01).unwrap(), 0.0199, 1e-15);
        assert!(silence_step(1.0, 0.0).is_err());
    }

    #[test]
    fn fuse_without_failures_matches_plain_or_fusion() {
        let t = ErrorTriplet::new(0.1, 0.2, 0.0).unwrap();
        let next = fuse_step(&t, 0.0).unwrap();
        close(next.alpha_f64(), 0.19, 1e-15);
        close(next.beta_f64(), 0.04, 1e-15);
        assert_eq!(next.q, 0.0);
    }

    #[test]
    fn fuse_with_silence_weights_both_cases() {
        let t = ErrorTriplet::new(0.1, 0.2, 0.1).unwrap();
        let next = fuse_step(&t, 0.01).unwrap();
        close(next.alpha_f64(), 0.191 / 1.1, 1e-15);
        close(next.beta_f64(), 0.076 / 1.1, 1e-15);
        close(next.q, 0.0199, 1e-15);
    }

    #[test]
    fn diagonal_states_preserve_total_error() {
        let t = ErrorTriplet::new(0.1, 0.1, 0.2).unwrap();
        let next = fuse_step(&t, 0.0).unwrap();
        close(next.alpha_f64(), 0.16, 1e-15);
        close(next.beta_f64(), 0.04, 1e-15);
        close(next.q, 0.04, 1e-15);
        close(total_error(&next).to_f64(), 0.2, 1e-14);
    }

    #[test]
    fn and_branch_mirrors_the_or_branch() {
        let t = ErrorTriplet::new(0.2, 0.1, 0.1).unwrap();
        let mirrored = ErrorTriplet::new(0.1, 0.2, 0.1).unwrap();
        let a = fuse_step(&t, 0.01).unwrap();
        let b = fuse_step(&mirrored, 0.01).unwrap();
        assert_eq!(a.alpha, b.beta);
        assert_eq!(a.beta, b.alpha);
        assert_eq!(a.q, b.q);
    }

    #[test]
    fn error_measures() {
        let t = ErrorTriplet::new(0.1, 0.2, 0.0).unwrap();
        close(total_error(&t).to_f64(), 0.3, 1e-15);
        close(weighted_error(&t, 0.5).unwrap().to_f64(), 0.15, 1e-15);
        close(weighted_error(&t, 0.4).unwrap().to_f64(), 0.16, 1e-15);
        assert!(weighted_error(&t, 0.0).is_err());
        assert!(weighted_error(&t, 1.0).is_err());
    }

    #[test]
    fn invalid_triplets_are_rejected() {
        assert!(ErrorTriplet::new(0.6, 0.4, 0.0).is_err());
        assert!(ErrorTriplet::new(-0.1, 0.2, 0.0).is_err());
        assert!(ErrorTriplet::new(0.1, 0.2, 1.0).is_err());
        assert!(ErrorTriplet::new(0.1, 0.2, 0.999).is_ok());
    }

    #[test]
    fn total_failure_next_level_is_rejected() {
        let t = ErrorTriplet::new(0.1, 0.2, 0.5).unwrap();
        assert!(matches!(fuse_step(&t, 1.0), Err(Error::Domain(_))));
    }
}
