//! Non-asymptotic bounds on the root error probability and related
//! diagnostics: the √N upper bound, the two-sided sandwich for even and odd
//! heights, prior-weighted variants, per-step ratio checks, sensor sizing,
//! and a finite-horizon classifier for whether a failure schedule decays
//! fast enough to preserve the √N error exponent.
//!
//! All logarithms are base 2; "bits" in a field name means log₂ of an
//! inverse probability.

use crate::error::{Error, Result};
use crate::ext::Ext;
use crate::fit::ols_slope;
use crate::schedule::FailureSchedule;
use crate::trajectory::{LevelRecord, Trajectory};
use crate::triplet::{fuse_step, total_error, ErrorTriplet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

fn check_sensor_count(n_sensors: u64) -> Result<u32> {
    if n_sensors == 0 || !n_sensors.is_power_of_two() {
        return Err(Error::Domain(format!(
            "sensor count must be a power of two, got {n_sensors}"
        )));
    }
    Ok(n_sensors.trailing_zeros())
}

fn check_l0(l0: f64) -> Result<()> {
    if l0.is_finite() && l0 > 0.0 && l0 < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("initial total error must lie in (0, 1), got {l0}")))
    }
}

/// Smallest C with q_k ≤ C·L_k over the given levels, i.e. max_k q_k / L_k.
/// Overflows past f64 range are reported as +∞. Levels with L_k = 0 make
/// every C-based bound inapplicable and are rejected.
pub fn estimate_c(levels: &[LevelRecord]) -> Result<f64> {
    if levels.is_empty() {
        return Err(Error::Domain("cannot estimate C from an empty trajectory".into()));
    }
    let mut best = Ext::ZERO;
    for rec in levels {
        if rec.l.is_zero() {
            return Err(Error::Domain(format!(
                "L_{} = 0: the ratio q_k/L_k (and every bound built on it) is undefined",
                rec.k
            )));
        }
        let ratio = Ext::from_f64(rec.triplet.q) / rec.l;
        if ratio > best {
            best = ratio;
        }
    }
    Ok(best.to_f64())
}

/// log₂(6C + 2), kept finite even when 6C+2 overflows f64 (the +2 is then
/// far below one ulp of 6C).
fn log2_6c_plus_2(c: f64) -> f64 {
    if c.is_infinite() {
        return f64::INFINITY;
    }
    let t = 6.0 * c + 2.0;
    if t.is_finite() {
        t.log2()
    } else {
        c.log2() + 6f64.log2()
    }
}

/// Upper bound on log₂ P_N⁻¹ that needs no constant C, valid for starts
/// inside R: √N·(log₂ L₀⁻¹ + 1).
pub fn upper_bound_bits(l0: f64, n_sensors: u64) -> Result<f64> {
    check_l0(l0)?;
    check_sensor_count(n_sensors)?;
    Ok((n_sensors as f64).sqrt() * ((1.0 / l0).log2() + 1.0))
}

#[derive(Clone, Copy, Debug)]
pub struct SandwichBounds {
    pub lower_bits: f64,
    pub upper_bits: f64,
    /// True when the lower bound is negative and therefore says nothing.
    pub vacuous: bool,
    pub parity: Parity,
}

/// Two-sided bounds on log₂ P_N⁻¹ under the assumption q_k ≤ C·L_k.
///
/// Even height: √N(log₂ L₀⁻¹ − log₂(6C+2)) ≤ log₂ P_N⁻¹ ≤ √N(log₂ L₀⁻¹ + 1).
/// Odd height the same with √(N/2) on the lower and √(2N) on the upper side.
pub fn sandwich_bounds(l0: f64, c_constant: f64, n_sensors: u64) -> Result<SandwichBounds> {
    check_l0(l0)?;
    if c_constant.is_nan() || c_constant < 0.0 {
        return Err(Error::Domain(format!("C must be nonnegative, got {c_constant}")));
    }
    let height = check_sensor_count(n_sensors)?;
    let n = n_sensors as f64;
    let bits0 = (1.0 / l0).log2();
    let penalty = log2_6c_plus_2(c_constant);
    let (lower, upper, parity) = if height % 2 == 0 {
        (n.sqrt() * (bits0 - penalty), n.sqrt() * (bits0 + 1.0), Parity::Even)
    } else {
        ((n / 2.0).sqrt() * (bits0 - penalty), (2.0 * n).sqrt() * (bits0 + 1.0), Parity::Odd)
    };
    Ok(SandwichBounds { lower_bits: lower, upper_bits: upper, vacuous: lower < 0.0, parity })
}

/// Sandwich for the prior-weighted error P̂_N = prior0·α + (1−prior0)·β.
///
/// The equal-prior bounds shift by log₂ of the inverse priors — the larger
/// prior on the lower side, the smaller on the upper side (labels are
/// swapped internally when prior0 > 1/2 so the convention
/// P(H₀) ≤ P(H₁) always holds). As prior0 approaches 0 or 1 the upper
/// shift grows without bound; it is reported as-is, not clamped.
pub fn weighted_sandwich_bounds(
    l0: f64,
    c_constant: f64,
    n_sensors: u64,
    prior0: f64,
) -> Result<SandwichBounds> {
    if !(prior0 > 0.0 && prior0 < 1.0) {
        return Err(Error::Domain(format!("prior must lie in (0, 1), got {prior0}")));
    }
    let base = sandwich_bounds(l0, c_constant, n_sensors)?;
    let small = prior0.min(1.0 - prior0);
    let large = prior0.max(1.0 - prior0);
    let lower = base.lower_bits + (1.0 / large).log2();
    let upper = base.upper_bits + (1.0 / small).log2();
    Ok(SandwichBounds { lower_bits: lower, upper_bits: upper, vacuous: lower < 0.0, parity: base.parity })
}

/// Per-level ratio diagnostics along a trajectory.
#[derive(Clone, Copy, Debug)]
pub struct StepRatioRow {
    pub k: usize,
    pub l: Ext,
    /// L_{k+1}/L_k; at most 1, with equality exactly on the diagonal α = β.
    pub one_step_ratio: Option<f64>,
    /// L_{k+1} ≤ L_k (relative slack 1e-12).
    pub contraction_ok: Option<bool>,
    /// L_{k+1} ≥ L_k² (relative slack 1e-12).
    pub above_square_ok: Option<bool>,
    /// L_{k+2}/L_k².
    pub two_step_ratio: Option<f64>,
    /// two_step_ratio ∈ [1/2 − 1e-12, (6C+2) + 1e-12].
    pub two_step_in_range: Option<bool>,
    /// Re-fusing level k with silence shrunk to 0.9·q_k does not increase
    /// L_{k+1} (relative slack 1e-12).
    pub smaller_q_ok: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct StepRatioReport {
    pub c_constant: f64,
    pub rows: Vec<StepRatioRow>,
    /// True when every defined check in every row passed.
    pub all_ok: bool,
}

const REL_SLACK: f64 = 1e-12;

fn le_with_rel_slack(a: Ext, b: Ext) -> bool {
    a <= b || (b > Ext::ZERO && (a / b).to_f64() <= 1.0 + REL_SLACK)
}

/// Checks the per-step inequalities along a trajectory: one-step contraction
/// L_{k+1} ≤ L_k, the one-step floor L_{k+1} ≥ L_k², the two-step window
/// 1/2 ≤ L_{k+2}/L_k² ≤ 6C+2, and that re-fusing any state with a smaller
/// silence never increases the next level's error mass.
pub fn check_step_ratios(traj: &Trajectory, c_constant: f64) -> StepRatioReport {
    let upper = 6.0 * c_constant + 2.0; // +∞ when C overflowed: the check is then vacuously true
    let levels = &traj.levels;
    let mut rows = Vec::with_capacity(levels.len());
    let mut all_ok = true;
    for k in 0..levels.len() {
        let l_k = levels[k].l;
        let mut row = StepRatioRow {
            k,
            l: l_k,
            one_step_ratio: None,
            contraction_ok: None,
            above_square_ok: None,
            two_step_ratio: None,
            two_step_in_range: None,
            smaller_q_ok: None,
        };
        if !l_k.is_zero() {
            if let Some(next) = levels.get(k + 1) {
                row.one_step_ratio = Some((next.l / l_k).to_f64());
                row.contraction_ok = Some(le_with_rel_slack(next.l, l_k));
                row.above_square_ok = Some(le_with_rel_slack(l_k * l_k, next.l));

                // Same step, silence shrunk by 10%.
                let t = levels[k].triplet;
                if let Some(p_next) = traj.schedule.p(k + 1) {
                    if let (Ok(shrunk), Ok(orig)) = (
                        ErrorTriplet::from_parts(t.alpha, t.beta, 0.9 * t.q)
                            .and_then(|s| fuse_step(&s, p_next)),
                        fuse_step(&t, p_next),
                    ) {
                        row.smaller_q_ok =
                            Some(le_with_rel_slack(total_error(&shrunk), total_error(&orig)));
                    }
                }
            }
            if let Some(two) = levels.get(k + 2) {
                let ratio = (two.l / (l_k * l_k)).to_f64();
                row.two_step_ratio = Some(ratio);
                row.two_step_in_range = Some(ratio >= 0.5 - 1e-12 && ratio <= upper + 1e-12);
            }
        }
        for ok in [row.contraction_ok, row.above_square_ok, row.two_step_in_range, row.smaller_q_ok]
        {
            if ok == Some(false) {
                all_ok = false;
            }
        }
        rows.push(row);
    }
    StepRatioReport { c_constant, rows, all_ok }
}

/// Smallest power-of-4 sensor count whose even-height lower bound guarantees
/// P_N ≤ ε: the least N = 4^j with N ≥ (log₂ ε⁻¹ / (log₂ L₀⁻¹ − log₂(6C+2)))².
pub fn required_sensors(epsilon: f64, l0: f64, c_constant: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    check_l0(l0)?;
    if c_constant.is_nan() || c_constant < 0.0 {
        return Err(Error::Domain(format!("C must be nonnegative, got {c_constant}")));
    }
    let margin = (1.0 / l0).log2() - log2_6c_plus_2(c_constant);
    if margin <= 0.0 {
        return Err(Error::BoundInapplicable(format!(
            "bound inapplicable for this C: log2(1/L0) = {:.6} does not exceed log2(6C+2) = {:.6}",
            (1.0 / l0).log2(),
            log2_6c_plus_2(c_constant)
        )));
    }
    let target = ((1.0 / epsilon).log2() / margin).powi(2);
    let mut n: u64 = 1;
    while (n as f64) < target {
        n = n.checked_mul(4).ok_or_else(|| {
            Error::Domain(format!("required sensor count exceeds u64 range (target {target:.3e})"))
        })?;
    }
    Ok(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayClass {
    Sufficient,
    Insufficient,
    Indeterminate,
}

impl std::fmt::Display for DecayClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecayClass::Sufficient => "sufficient",
            DecayClass::Insufficient => "insufficient",
            DecayClass::Indeterminate => "indeterminate",
        })
    }
}

/// Decision threshold for [`classify_decay`]'s normalized rates.
pub const DECAY_THRESHOLD: f64 = 0.05;

/// Finite-horizon surrogate for "does log₂ p_k⁻¹ grow at least like 2^{k/2}".
///
/// Over the last half of the horizon it computes r_k = log₂(p_k⁻¹)/2^{k/2}
/// (+∞ where p_k underflows to zero) and rules:
///
/// * insufficient — the r_k are finite, non-increasing, and falling at a
///   fitted log₂-slope of at most −0.05 per level (or stuck at 0 outright);
/// * sufficient — otherwise, if every finite r_k and the final one clear
///   the threshold 0.05;
/// * indeterminate — anything else.
///
/// The asymptotic condition has no finite test, so this is a labeled
/// surrogate, not a certificate. Increasing schedules are rejected.
pub fn classify_decay(schedule: &FailureSchedule, horizon: usize) -> Result<DecayClass> {
    if horizon < 8 {
        return Err(Error::Domain(format!(
            "decay classification needs a horizon of at least 8 levels, got {horizon}"
        )));
    }
    let ps = schedule.take(horizon, horizon)?;
    for k in 0..horizon {
        if ps[k + 1] > ps[k] {
            return Err(Error::Domain(format!(
                "decay classification requires a non-increasing schedule (p_{} = {} > p_{} = {})",
                k + 1,
                ps[k + 1],
                k,
                ps[k]
            )));
        }
    }
    let start = horizon.div_ceil(2);
    let rates: Vec<f64> = (start..=horizon)
        .map(|k| {
            let p = ps[k];
            if p == 0.0 {
                f64::INFINITY
            } else {
                (1.0 / p).log2() / ((k as f64) / 2.0).exp2()
            }
        })
        .collect();

    let all_finite = rates.iter().all(|r| r.is_finite());
    if all_finite {
        if rates.contains(&0.0) {
            return Ok(DecayClass::Insufficient); // p stuck at 1: no decay at all
        }
        let non_increasing = rates.windows(2).all(|w| w[1] <= w[0]);
        let pts: Vec<(f64, f64)> = rates
            .iter()
            .enumerate()
            .map(|(i, &r)| ((start + i) as f64, r.log2()))
            .collect();
        let trending_to_zero =
            non_increasing && ols_slope(&pts).is_some_and(|s| s <= -DECAY_THRESHOLD);
        if trending_to_zero {
            return Ok(DecayClass::Insufficient);
        }
    }
    let min_finite = rates.iter().copied().filter(|r| r.is_finite()).fold(f64::INFINITY, f64::min);
    let last = *rates.last().expect("window is nonempty");
    if min_finite >= DECAY_THRESHOLD && last >= DECAY_THRESHOLD {
        Ok(DecayClass::Sufficient)
    } else {
        Ok(DecayClass::Indeterminate)
    }
}

/// Flat record of the bounds for one configuration, ready for key/value or
/// CSV serialization.
#[derive(Clone, Debug)]
pub struct BoundsReport {
    pub n_sensors: u64,
    pub height: u32,
    pub parity: Parity,
    pub c_constant: f64,
    /// Bounds on log₂ P̂_N⁻¹ at the stored priors (equal priors give the
    /// plain total-error sandwich shifted by one bit on each side).
    pub lower_bits: f64,
    pub upper_bits: f64,
    pub vacuous: bool,
    pub prior0: f64,
    pub prior1: f64,
    /// Initial total error L₀ the bounds were evaluated from.
    pub l0: f64,
    /// Equal-prior sandwich on log₂ P_N⁻¹ with P_N = L at the root.
    pub l_lower_bits: f64,
    pub l_upper_bits: f64,
    pub l_vacuous: bool,
    /// Measured values from the trajectory this report was built from.
    pub measured_l_bits: f64,
    pub measured_weighted_bits: f64,
}

/// Builds the full report for one evolved trajectory: C is estimated from
/// the realized levels (override with [`bounds_report_with_c`]).
pub fn bounds_report(traj: &Trajectory, prior0: f64) -> Result<BoundsReport> {
    let c = estimate_c(&traj.levels)?;
    bounds_report_with_c(traj, prior0, c)
}

pub fn bounds_report_with_c(traj: &Trajectory, prior0: f64, c_constant: f64) -> Result<BoundsReport> {
    let height = traj.height();
    if height == 0 {
        return Err(Error::Domain("bounds need a trajectory of height ≥ 1".into()));
    }
    if height > 63 {
        return Err(Error::Domain(format!("height {height} overflows the u64 sensor count")));
    }
    let n_sensors = 1u64 << height;
    let l0 = traj.levels[0].l.to_f64();
    let plain = sandwich_bounds(l0, c_constant, n_sensors)?;
    let weighted = weighted_sandwich_bounds(l0, c_constant, n_sensors, prior0)?;
    let root = traj.root();
    let weighted_root = crate::triplet::weighted_error(&root.triplet, prior0)?;
    Ok(BoundsReport {
        n_sensors,
        height: height as u32,
        parity: plain.parity,
        c_constant,
        lower_bits: weighted.lower_bits,
        upper_bits: weighted.upper_bits,
        vacuous: weighted.vacuous,
        prior0,
        prior1: 1.0 - prior0,
        l0,
        l_lower_bits: plain.lower_bits,
        l_upper_bits: plain.upper_bits,
        l_vacuous: plain.vacuous,
        measured_l_bits: -root.l.log2(),
        measured_weighted_bits: -weighted_root.log2(),
    })
}
