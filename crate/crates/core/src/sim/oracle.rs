//! Exact distribution of the (Type I, Type II) pair at each tree level.
//!
//! The closed-form recursion propagates only the *mean* error pair. This
//! oracle carries the full finite distribution, conditioned on the node
//! having data, level by level: with silence q at the child level, the
//! parent saw two messages with probability (1−q)/(1+q) (atoms combine
//! under the level's fixed fusion rule) and one with probability 2q/(1+q)
//! (the atom passes through). Sibling subtrees are independent, so the
//! distribution's mean must reproduce the recursion exactly — any gap
//! beyond float noise indicates a modeling bug, which is the point.
//!
//! Silence itself is *not* taken from the closed-form silence recursion;
//! it is rebuilt from elementary bookkeeping (a node starves when both
//! children are silent; a node with data loses its message with the local
//! failure probability), so comparing the two is a real check.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::schedule::FailureSchedule;
use crate::trajectory::evolve;

/// Hard ceiling on the tree height the oracle accepts.
pub const ORACLE_HEIGHT_CAP: usize = 6;

/// Ceiling on atom pairs expanded in one fusion level. Atom counts grow
/// roughly as m²/2 per level (1, 2, 5, 20, 230, 26795, …), so height 6
/// stays feasible only for schedules whose support collapses (e.g. q ≡ 0).
pub const ORACLE_PAIR_BUDGET: u128 = 2_000_000;

/// Atoms whose coordinates round to the same multiple of this grid are
/// merged. Merging uses the weighted mean, which leaves the distribution's
/// mean exactly unchanged.
const DEDUP_GRID: f64 = 1e-14;

#[derive(Clone, Copy, Debug)]
pub struct PairAtom {
    pub type_i: f64,
    pub type_ii: f64,
    pub weight: f64,
}

/// Finite distribution of the error pair, conditioned on the node having
/// data, plus the probability of that conditioning event.
#[derive(Clone, Debug)]
pub struct PairDistribution {
    pub atoms: Vec<PairAtom>,
    pub data_prob: f64,
}

impl PairDistribution {
    pub fn mean(&self) -> (f64, f64) {
        let mut a = 0.0;
        let mut b = 0.0;
        for atom in &self.atoms {
            a += atom.weight * atom.type_i;
            b += atom.weight * atom.type_ii;
        }
        (a, b)
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }
}

#[derive(Clone, Debug)]
pub struct OracleLevel {
    pub height: usize,
    pub dist: PairDistribution,
    /// Probability that this level's message is missing at its parent:
    /// starvation plus transmission failure, composed from scratch.
    pub silence: f64,
}

fn bin_key(x: f64) -> i64 {
    (x / DEDUP_GRID).round() as i64
}

/// Merges atoms that fall into the same 1e-14 grid cell, replacing each
/// cell's population with its weighted mean.
fn dedup(atoms: Vec<PairAtom>) -> Vec<PairAtom> {
    // BTreeMap keeps the result order (and therefore all downstream float
    // summation) independent of hashing details across runs.
    let mut cells: BTreeMap<(i64, i64), (f64, f64, f64)> = BTreeMap::new();
    for atom in atoms {
        let cell = cells
            .entry((bin_key(atom.type_i), bin_key(atom.type_ii)))
            .or_insert((0.0, 0.0, 0.0));
        cell.0 += atom.weight;
        cell.1 += atom.weight * atom.type_i;
        cell.2 += atom.weight * atom.type_ii;
    }
    cells
        .into_values()
        .map(|(w, wa, wb)| PairAtom { type_i: wa / w, type_ii: wb / w, weight: w })
        .collect()
}

/// Builds the exact conditional pair distribution at every level from 0 to
/// `height`, along with the independently derived silence probabilities.
pub fn exact_levels(
    alpha0: f64,
    beta0: f64,
    schedule: &FailureSchedule,
    height: usize,
) -> Result<Vec<OracleLevel>> {
    if height > ORACLE_HEIGHT_CAP {
        return Err(Error::Domain(format!(
            "exact distribution supports heights up to {ORACLE_HEIGHT_CAP}, got {height}"
        )));
    }
    // The nominal trajectory fixes each level's fusion rule (OR-type while
    // α ≤ β, AND-type otherwise); rules never adapt to a realization.
    let nominal = evolve(alpha0, beta0, schedule, height)?;
    let ps = schedule.take(height, height)?;

    let mut levels = Vec::with_capacity(height + 1);
    levels.push(OracleLevel {
        height: 0,
        dist: PairDistribution {
            atoms: vec![PairAtom { type_i: alpha0, type_ii: beta0, weight: 1.0 }],
            data_prob: 1.0, // sensors always have data; only their messages get lost
        },
        silence: ps[0],
    });

    for j in 1..=height {
        let prev = &levels[j - 1];
        let q = prev.silence;
        let atoms = &prev.dist.atoms;
        let m = atoms.len() as u128;
        let pairs = m * (m + 1) / 2;
        if pairs > ORACLE_PAIR_BUDGET {
            return Err(Error::OracleBudget(format!(
                "level {} holds {} atoms ({} fusion pairs, budget {}); only schedules whose \
                 atom support collapses fit at this height",
                j - 1,
                m,
                pairs,
                ORACLE_PAIR_BUDGET
            )));
        }
        let w_forward = 2.0 * q / (1.0 + q);
        let w_fuse = (1.0 - q) / (1.0 + q);
        let or_rule = nominal.levels[j - 1].triplet.alpha <= nominal.levels[j - 1].triplet.beta;

        let mut next: Vec<PairAtom> = Vec::with_capacity(atoms.len() * (atoms.len() + 3) / 2);
        if w_forward > 0.0 {
            next.extend(atoms.iter().map(|a| PairAtom { weight: a.weight * w_forward, ..*a }));
        }
        if w_fuse > 0.0 {
            for i in 0..atoms.len() {
                for k in i..atoms.len() {
                    let (x, y) = (&atoms[i], &atoms[k]);
                    let multiplicity = if i == k { 1.0 } else { 2.0 };
                    let weight = x.weight * y.weight * multiplicity * w_fuse;
                    let (type_i, type_ii) = if or_rule {
                        // Decide 1 if either message says 1.
                        (
                            x.type_i + y.type_i - x.type_i * y.type_i,
                            x.type_ii * y.type_ii,
                        )
                    } else {
                        // Decide 1 only if both say 1.
                        (
                            x.type_i * y.type_i,
                            x.type_ii + y.type_ii - x.type_ii * y.type_ii,
                        )
                    };
                    next.push(PairAtom { type_i, type_ii, weight });
                }
            }
        }

        let data_prob = 1.0 - q * q;
        let silence = (1.0 - data_prob) + data_prob * ps[j];
        levels.push(OracleLevel {
            height: j,
            dist: PairDistribution { atoms: dedup(next), data_prob },
            silence,
        });
    }
    Ok(levels)
}

/// The root-level distribution; see [`exact_levels`].
pub fn exact_pair_distribution(
    alpha0: f64,
    beta0: f64,
    schedule: &FailureSchedule,
    height: usize,
) -> Result<PairDistribution> {
    Ok(exact_levels(alpha0, beta0, schedule, height)?
        .pop()
        .expect("exact_levels returns height+1 entries")
        .dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::evolve;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn height_one_without_failures_is_a_single_fused_atom() {
        let sched = FailureSchedule::constant(0.0).unwrap();
        let dist = exact_pair_distribution(0.1, 0.2, &sched, 1).unwrap();
        assert_eq!(dist.atoms.len(), 1);
        close(dist.atoms[0].type_i, 0.19, 1e-15);
        close(dist.atoms[0].type_ii, 0.04, 1e-15);
        close(dist.atoms[0].weight, 1.0, 1e-15);
        assert_eq!(dist.data_prob, 1.0);
    }

    #[test]
    fn height_one_with_silence_weights_forward_and_fused_atoms() {
        let sched = FailureSchedule::constant(0.1).unwrap();
        let dist = exact_pair_distribution(0.1, 0.2, &sched, 1).unwrap();
        assert_eq!(dist.atoms.len(), 2);
        // Forwarded atom keeps (α0, β0) and carries weight 2q/(1+q).
        let fwd = dist
            .atoms
            .iter()
            .find(|a| (a.type_i - 0.1).abs() < 1e-12)
            .expect("forwarded atom present");
        close(fwd.weight, 0.2 / 1.1, 1e-15);
        close(fwd.type_ii, 0.2, 1e-15);
        // Mean reproduces one fusion step exactly.
        let (ma, mb) = dist.mean();
        let rec = evolve(0.1, 0.2, &sched, 1).unwrap();
        close(ma, rec.root().triplet.alpha_f64(), 1e-14);
        close(mb, rec.root().triplet.beta_f64(), 1e-14);
        close(dist.data_prob, 1.0 - 0.1 * 0.1, 1e-15);
    }

    #[test]
    fn means_track_the_recursion_through_height_five() {
        let sched = FailureSchedule::quadratic(0.1).unwrap();
        let levels = exact_levels(0.1, 0.2, &sched, 5).unwrap();
        let traj = evolve(0.1, 0.2, &sched, 5).unwrap();
        for (lvl, rec) in levels.iter().zip(&traj.levels) {
            let (a, b) = lvl.dist.mean();
            close(a, rec.triplet.alpha_f64(), 1e-12);
            close(b, rec.triplet.beta_f64(), 1e-12);
            close(lvl.silence, rec.triplet.q, 1e-12);
            close(lvl.dist.total_weight(), 1.0, 1e-12);
        }
    }

    #[test]
    fn atom_counts_follow_the_pairing_growth() {
        let sched = FailureSchedule::constant(0.1).unwrap();
        let levels = exact_levels(0.1, 0.2, &sched, 4).unwrap();
        let counts: Vec<usize> = levels.iter().map(|l| l.dist.atoms.len()).collect();
        // m + m(m+1)/2 caps each level's support, but some points coincide
        // exactly — OR-fusing two copies of the leaf atom (0.1, 0.2) lands
        // on (0.19, 0.04), the forwarded level-1 fusion — and merge.
        assert_eq!(counts, vec![1, 2, 5, 19, 200]);
        for w in counts.windows(2) {
            assert!(w[1] <= w[0] + w[0] * (w[0] + 1) / 2);
        }
    }

    #[test]
    fn the_cap_and_budget_guard_fire() {
        let sched = FailureSchedule::constant(0.1).unwrap();
        assert!(matches!(
            exact_levels(0.1, 0.2, &sched, 7),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            exact_levels(0.1, 0.2, &sched, 6),
            Err(Error::OracleBudget(_))
        ));
        // A collapsing (zero-silence) schedule keeps one atom per level, so
        // height 6 is fine there.
        let zero = FailureSchedule::constant(0.0).unwrap();
        let levels = exact_levels(0.1, 0.2, &zero, 6).unwrap();
        assert!(levels.iter().all(|l| l.dist.atoms.len() == 1));
    }
}
