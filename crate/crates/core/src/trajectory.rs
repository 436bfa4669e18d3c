//! Level-by-level evolution of the error triplet up a relay tree.

use crate::error::{Error, Result};
use crate::ext::Ext;
use crate::geometry::{classify, RegionLabel};
use crate::schedule::FailureSchedule;
use crate::triplet::{fuse_step, total_error, ErrorTriplet};

#[derive(Clone, Copy, Debug)]
pub struct LevelRecord {
    pub k: usize,
    pub triplet: ErrorTriplet,
    /// Total error mass L_k = α_k + β_k.
    pub l: Ext,
    /// L_k / 2, the equal-prior error probability; emitted alongside L so
    /// downstream consumers never have to guess which convention a column
    /// uses.
    pub half_l: Ext,
    /// Starvation probability P_k = q_{k−1}² (P_0 = 0): the chance a level-k
    /// node hears from neither child.
    pub starvation: f64,
    pub region: RegionLabel,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub levels: Vec<LevelRecord>,
    pub schedule: FailureSchedule,
}

impl Trajectory {
    pub fn root(&self) -> &LevelRecord {
        self.levels.last().expect("trajectories hold at least level 0")
    }

    pub fn height(&self) -> usize {
        self.levels.len() - 1
    }
}

fn record(k: usize, triplet: ErrorTriplet, starvation: f64) -> LevelRecord {
    let l = total_error(&triplet);
    LevelRecord {
        k,
        triplet,
        l,
        half_l: l * Ext::from_f64(0.5),
        starvation,
        region: classify(&triplet),
    }
}

/// Runs the fusion recursion for `height` steps from sensors with error
/// probabilities (alpha0, beta0).
///
/// The initial silence is taken from the schedule: q_0 = p_0. The schedule
/// must also provide p_1..=p_height for the silence recursion; explicit
/// schedules that are too short are rejected.
pub fn evolve(
    alpha0: f64,
    beta0: f64,
    schedule: &FailureSchedule,
    height: usize,
) -> Result<Trajectory> {
    let p0 = schedule.p(0).ok_or(Error::ScheduleTooShort {
        available: 0,
        needed: 1,
        height,
    })?;
    if p0 >= 1.0 {
        return Err(Error::Domain(
            "p_0 = 1 silences every sensor (q_0 = p_0 must be < 1)".into(),
        ));
    }
    let mut t = ErrorTriplet::new(alpha0, beta0, p0)?;
    let mut levels = Vec::with_capacity(height + 1);
    levels.push(record(0, t, 0.0));
    for k in 0..height {
        let p_next = schedule.p(k + 1).ok_or(Error::ScheduleTooShort {
            available: schedule.horizon().unwrap_or(0),
            needed: height + 1,
            height,
        })?;
        let starvation = t.q * t.q;
        t = fuse_step(&t, p_next)?;
        levels.push(record(k + 1, t, starvation));
    }
    Ok(Trajectory { levels, schedule: schedule.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn height_zero_holds_only_the_start() {
        let sched = FailureSchedule::constant(0.1).unwrap();
        let traj = evolve(0.1, 0.2, &sched, 0).unwrap();
        assert_eq!(traj.levels.len(), 1);
        assert_eq!(traj.root().triplet.q, 0.1);
        assert_eq!(traj.root().starvation, 0.0);
        assert_eq!(traj.height(), 0);
    }

    #[test]
    fn evolve_replays_fuse_step() {
        let sched = FailureSchedule::quadratic(0.1).unwrap();
        let traj = evolve(0.1, 0.2, &sched, 2).unwrap();
        let mut t = ErrorTriplet::new(0.1, 0.2, 0.1).unwrap();
        for k in 0..2 {
            t = fuse_step(&t, sched.p(k + 1).unwrap()).unwrap();
            let rec = &traj.levels[k + 1];
            assert_eq!(rec.triplet.alpha, t.alpha);
            assert_eq!(rec.triplet.beta, t.beta);
            assert_eq!(rec.triplet.q, t.q);
        }
    }

    #[test]
    fn starvation_is_previous_silence_squared() {
        let sched = FailureSchedule::constant(0.2).unwrap();
        let traj = evolve(0.1, 0.3, &sched, 6).unwrap();
        for k in 1..=6 {
            let q_prev = traj.levels[k - 1].triplet.q;
            assert_eq!(traj.levels[k].starvation, q_prev * q_prev);
        }
    }

    #[test]
    fn zero_failure_schedule_keeps_q_at_zero() {
        let sched = FailureSchedule::constant(0.0).unwrap();
        let traj = evolve(0.1, 0.2, &sched, 10).unwrap();
        for rec in &traj.levels {
            assert_eq!(rec.triplet.q, 0.0);
            assert_eq!(rec.starvation, 0.0);
        }
        // The rule alternates (OR inflates α until it dominates, then AND
        // takes over), and with no silence the total error falls fast.
        for k in 1..=10 {
            let (prev, cur) = (&traj.levels[k - 1].triplet, &traj.levels[k].triplet);
            assert!(total_error(cur) < total_error(prev), "level {k}");
        }
        assert!(total_error(&traj.root().triplet).to_f64() < 1e-4);
    }

    #[test]
    fn short_explicit_schedules_are_rejected() {
        let sched = FailureSchedule::explicit(vec![0.1, 0.01]).unwrap();
        assert!(evolve(0.1, 0.2, &sched, 1).is_ok());
        assert!(matches!(
            evolve(0.1, 0.2, &sched, 2),
            Err(Error::ScheduleTooShort { available: 2, needed: 3, height: 2 })
        ));
    }

    #[test]
    fn deep_trajectories_keep_resolving_l() {
        let sched = FailureSchedule::quadratic(0.1).unwrap();
        let traj = evolve(0.1, 0.2, &sched, 20).unwrap();
        let bits = -traj.root().l.log2();
        assert!(bits > 500.0, "L_20 should be far below f64 range, got 2^-{bits}");
        assert!(bits.is_finite());
        // Every level keeps a strictly positive error mass.
        for rec in &traj.levels {
            assert!(!rec.l.is_zero());
        }
    }
}
