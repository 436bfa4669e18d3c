//! Region geometry of the fusion recursion.
//!
//! In the prism {α ≥ 0, β ≥ 0, α+β < 1, 0 ≤ q < 1}, U is the half with
//! β ≥ α and L the half with β < α. Two nested subsets of U matter:
//!
//! * `B` — the states that one fusion step carries across the diagonal
//!   β = α (its upper boundary maps exactly onto β' = α');
//! * `R_U` — a slightly larger set whose union with its mirror image `R_L`
//!   is invariant: once a trajectory with non-increasing silence enters
//!   R = R_U ∪ R_L, it never leaves.
//!
//! Both upper boundaries are computed here in a conjugate form that avoids
//! the cancellation in the textbook `(√(q²+X) − q)/(1−q)` expression and
//! stays accurate when α is far below f64 range.

use crate::error::{Error, Result};
use crate::ext::Ext;
use crate::triplet::{fuse_step, total_error, ErrorTriplet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionLabel {
    /// Upper half, inside B (will cross the diagonal next step).
    B,
    /// Upper half, inside R_U but not B.
    RuMinusB,
    /// Upper half, outside R_U.
    UOutsideB,
    /// Lower half, inside R_L (mirror image of R_U).
    Rl,
    /// Lower half, outside R_L.
    LOutsideRl,
    /// α + β ≥ 1 or q outside [0, 1).
    Invalid,
}

impl RegionLabel {
    pub fn in_r(self) -> bool {
        matches!(self, RegionLabel::B | RegionLabel::RuMinusB | RegionLabel::Rl)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::B => "B",
            RegionLabel::RuMinusB => "R_U-minus-B",
            RegionLabel::UOutsideB => "U-outside-B",
            RegionLabel::Rl => "R_L",
            RegionLabel::LOutsideRl => "L-outside-R_L",
            RegionLabel::Invalid => "invalid",
        }
    }
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_args(alpha: f64, q: f64) -> Result<()> {
    if !(alpha.is_finite() && (0.0..1.0).contains(&alpha)) {
        return Err(Error::Domain(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    if !(q.is_finite() && (0.0..1.0).contains(&q)) {
        return Err(Error::Domain(format!(
            "q must lie in [0, 1), got {q} (the boundary formulas divide by 1-q)"
        )));
    }
    Ok(())
}

/// β value of B's upper boundary at (α, q), extended-range form.
///
/// With X = (1−q)²(2α−α²) + 2q(1−q)α the boundary is
/// (√(q²+X) − q)/(1−q) = X / ((1−q)(√(q²+X) + q)), and the second form
/// subtracts nothing.
pub(crate) fn b_upper_ext(alpha: Ext, q: f64) -> Ext {
    let two = Ext::from_f64(2.0);
    if q == 0.0 {
        return (alpha * (two - alpha)).sqrt();
    }
    let one_minus_q = Ext::from_f64(1.0 - q);
    let q_ext = Ext::from_f64(q);
    let x = one_minus_q * one_minus_q * alpha * (two - alpha)
        + Ext::from_f64(2.0 * q) * one_minus_q * alpha;
    if x.is_zero() {
        return Ext::ZERO;
    }
    x / (one_minus_q * ((q_ext * q_ext + x).sqrt() + q_ext))
}

/// β value of R_U's upper boundary at (α, q), extended-range form.
///
/// With Y = (1−q²)α the boundary is −α + 2(√(q²+Y) − q)/(1−q)
/// = 2(1+q)α/(√(q²+Y) + q) − α.
pub(crate) fn ru_upper_ext(alpha: Ext, q: f64) -> Ext {
    if q == 0.0 {
        // −α + 2√α; nonnegative for α ≤ 1 (saturating subtraction is exact here).
        return Ext::from_f64(2.0) * alpha.sqrt() - alpha;
    }
    let q_ext = Ext::from_f64(q);
    let y = Ext::from_f64(1.0 + q) * Ext::from_f64(1.0 - q) * alpha;
    if y.is_zero() {
        return Ext::ZERO;
    }
    Ext::from_f64(2.0 * (1.0 + q)) * alpha / ((q_ext * q_ext + y).sqrt() + q_ext) - alpha
}

/// β value of B's upper boundary at (α, q); reduces to √(2α−α²) at q = 0.
pub fn b_upper_boundary(alpha: f64, q: f64) -> Result<f64> {
    check_args(alpha, q)?;
    Ok(b_upper_ext(Ext::from_f64(alpha), q).to_f64())
}

/// β value of R_U's upper boundary at (α, q); reduces to −α + 2√α at q = 0.
pub fn ru_upper_boundary(alpha: f64, q: f64) -> Result<f64> {
    check_args(alpha, q)?;
    Ok(ru_upper_ext(Ext::from_f64(alpha), q).to_f64())
}

/// Region membership. Labels are assigned innermost-out (B before
/// R_U-minus-B before U-outside-B) so they are disjoint; points on an upper
/// boundary belong to the inner region, and the diagonal β = α lies in B.
/// States with β < α are mirrored across the diagonal before testing and
/// reported with the lower-half labels.
pub fn classify(t: &ErrorTriplet) -> RegionLabel {
    if !(0.0..1.0).contains(&t.q) || total_error(t) >= Ext::ONE {
        return RegionLabel::Invalid;
    }
    let upper = t.alpha <= t.beta;
    let (a, b) = if upper { (t.alpha, t.beta) } else { (t.beta, t.alpha) };
    if upper {
        if b <= b_upper_ext(a, t.q) {
            RegionLabel::B
        } else if b <= ru_upper_ext(a, t.q) {
            RegionLabel::RuMinusB
        } else {
            RegionLabel::UOutsideB
        }
    } else if b <= ru_upper_ext(a, t.q) {
        RegionLabel::Rl
    } else {
        RegionLabel::LOutsideRl
    }
}

/// Membership in R = R_U ∪ R_L with an absolute slack on the boundary
/// comparison (the larger coordinate may exceed the boundary by `tol`).
pub fn in_r_with_tol(t: &ErrorTriplet, tol: f64) -> bool {
    if !(0.0..1.0).contains(&t.q) || total_error(t) >= Ext::ONE {
        return false;
    }
    let (a, b) = if t.alpha <= t.beta { (t.alpha, t.beta) } else { (t.beta, t.alpha) };
    b <= ru_upper_ext(a, t.q) + Ext::from_f64(tol)
}

/// Whether one fusion step carries `t` across (or onto) the diagonal,
/// i.e. β' ≤ α'. For states in U this is equivalent to membership in B.
pub fn check_flip(t: &ErrorTriplet, p_next: f64) -> Result<bool> {
    let next = fuse_step(t, p_next)?;
    Ok(next.beta <= next.alpha)
}

#[derive(Clone, Debug)]
pub struct InvarianceReport {
    /// (level, label) for each trajectory entry.
    pub labels: Vec<(usize, RegionLabel)>,
    /// First level whose state lies in R, if any.
    pub first_entry: Option<usize>,
    /// Levels after `first_entry` whose state left R (1e-12 boundary slack).
    pub violations: Vec<usize>,
}

/// Replays a trajectory and flags any exit from R after first entry.
/// Meaningful under the monotone-silence hypotheses (non-increasing
/// schedule with q_1 ≤ q_0); the function itself imposes nothing.
pub fn verify_invariance(
    alpha0: f64,
    beta0: f64,
    schedule: &crate::schedule::FailureSchedule,
    height: usize,
) -> Result<InvarianceReport> {
    let traj = crate::trajectory::evolve(alpha0, beta0, schedule, height)?;
    let mut labels = Vec::with_capacity(traj.levels.len());
    let mut first_entry = None;
    let mut violations = Vec::new();
    for rec in &traj.levels {
        let label = rec.region;
        labels.push((rec.k, label));
        match first_entry {
            None => {
                if label.in_r() {
                    first_entry = Some(rec.k);
                }
            }
            Some(_) => {
                if !in_r_with_tol(&rec.triplet, 1e-12) {
                    violations.push(rec.k);
                }
            }
        }
    }
    Ok(InvarianceReport { labels, first_entry, violations })
}
