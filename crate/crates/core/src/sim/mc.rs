//! Monte Carlo simulation of randomly pruned relay trees.
//!
//! Each trial grows a full binary tree, erases messages according to the
//! schedule, and propagates hard decisions with the per-level fusion rules
//! fixed from the nominal recursion. Both hypotheses share one failure
//! pattern and one uniform draw per sensor, so their estimates are paired.
//!
//! Every trial derives its generator from (seed, trial index) and all
//! accumulators are integer counts, so results are bit-identical for a
//! fixed seed no matter how trials are split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::schedule::FailureSchedule;
use crate::trajectory::evolve;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimEstimate {
    pub trials: u64,
    /// P(decide H1 | H0, root has data).
    pub est_type_i: f64,
    /// P(decide H0 | H1, root has data).
    pub est_type_ii: f64,
    /// P(root has no data).
    pub est_starvation: f64,
    /// 1.96 · the largest of the three estimates' standard errors.
    pub half_width_95: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct McDetail {
    pub estimate: SimEstimate,
    /// Empirical silence frequency of one fixed node per level 0..height-1
    /// (its message missing at the parent), for checking the silence
    /// recursion level by level.
    pub level_silence: Vec<f64>,
    /// Error probability with a starving root charged min(prior0, 1−prior0)
    /// — the decide-for-the-likelier-hypothesis convention. The headline
    /// estimates stay conditional on the root having data.
    pub unconditional_weighted: f64,
    pub data_trials: u64,
}

#[derive(Clone)]
struct Counts {
    wrong_h0: u64,
    wrong_h1: u64,
    starved: u64,
    silent_at_level: Vec<u64>,
}

impl Counts {
    fn new(height: usize) -> Self {
        Counts { wrong_h0: 0, wrong_h1: 0, starved: 0, silent_at_level: vec![0; height] }
    }

    fn merge(mut self, other: Counts) -> Counts {
        self.wrong_h0 += other.wrong_h0;
        self.wrong_h1 += other.wrong_h1;
        self.starved += other.starved;
        for (a, b) in self.silent_at_level.iter_mut().zip(other.silent_at_level) {
            *a += b;
        }
        self
    }
}

struct Scratch {
    decide_h0: Vec<u8>,
    decide_h1: Vec<u8>,
    silent: Vec<bool>,
}

/// Whether the message leaving a node at `level` is lost. Raw schedules
/// draw the node and link failures separately; p-only schedules make one
/// draw, which yields the same message-level law.
#[derive(Clone, Copy)]
enum Erasure {
    Single(f64),
    NodeLink(f64, f64),
}

impl Erasure {
    fn sample(self, rng: &mut ChaCha8Rng) -> bool {
        match self {
            Erasure::Single(p) => rng.random::<f64>() < p,
            Erasure::NodeLink(n, l) => {
                let node = rng.random::<f64>() < n;
                let link = rng.random::<f64>() < l;
                node || link
            }
        }
    }
}

/// Everything shared by all trials of one simulation run.
struct RunSetup {
    seed: u64,
    height: usize,
    alpha0: f64,
    beta0: f64,
    erasures: Vec<Erasure>,
    or_rule: Vec<bool>,
}

fn run_trial(trial: u64, setup: &RunSetup, scratch: &mut Scratch, counts: &mut Counts) {
    let RunSetup { seed, height, alpha0, beta0, ref erasures, ref or_rule } = *setup;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let n = 1usize << height;
    let (d0, d1, silent) =
        (&mut scratch.decide_h0, &mut scratch.decide_h1, &mut scratch.silent);

    for i in 0..n {
        let u: f64 = rng.random();
        d0[i] = u8::from(u < alpha0); // wrong under H0 means deciding 1
        d1[i] = u8::from(u >= beta0); // wrong under H1 means deciding 0
        silent[i] = erasures[0].sample(&mut rng);
    }
    if silent[0] {
        counts.silent_at_level[0] += 1;
    }

    let mut width = n;
    for level in 1..=height {
        width /= 2;
        let or = or_rule[level - 1];
        for i in 0..width {
            let (a, b) = (2 * i, 2 * i + 1);
            match (silent[a], silent[b]) {
                (true, true) => silent[i] = true,
                (false, true) => {
                    d0[i] = d0[a];
                    d1[i] = d1[a];
                    silent[i] = false;
                }
                (true, false) => {
                    d0[i] = d0[b];
                    d1[i] = d1[b];
                    silent[i] = false;
                }
                (false, false) => {
                    if or {
                        d0[i] = d0[a] | d0[b];
                        d1[i] = d1[a] | d1[b];
                    } else {
                        d0[i] = d0[a] & d0[b];
                        d1[i] = d1[a] & d1[b];
                    }
                    silent[i] = false;
                }
            }
            if level < height && !silent[i] && erasures[level].sample(&mut rng) {
                silent[i] = true;
            }
        }
        if level < height && silent[0] {
            counts.silent_at_level[level] += 1;
        }
    }

    if silent[0] {
        counts.starved += 1;
    } else {
        counts.wrong_h0 += u64::from(d0[0] == 1);
        counts.wrong_h1 += u64::from(d1[0] == 0);
    }
}

/// Runs `trials` independent tree realizations and reports conditional
/// error estimates, starvation frequency, and per-level silence counts.
pub fn monte_carlo_detailed(
    alpha0: f64,
    beta0: f64,
    schedule: &FailureSchedule,
    height: usize,
    trials: u64,
    seed: u64,
    prior0: f64,
) -> Result<McDetail> {
    if height == 0 {
        return Err(Error::Domain("simulation needs a tree of height ≥ 1".into()));
    }
    if height > 24 {
        return Err(Error::Domain(format!(
            "height {height} would allocate 2^{height} sensors per worker; 24 is the ceiling"
        )));
    }
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    if !(prior0 > 0.0 && prior0 < 1.0) {
        return Err(Error::Domain(format!("prior must lie in (0, 1), got {prior0}")));
    }

    // Fusion rules come from the nominal recursion over levels 0..height-1
    // and never adapt per realization.
    let nominal = evolve(alpha0, beta0, schedule, height - 1)?;
    let setup = RunSetup {
        seed,
        height,
        alpha0,
        beta0,
        or_rule: nominal.levels.iter().map(|r| r.triplet.alpha <= r.triplet.beta).collect(),
        erasures: (0..height)
            .map(|k| {
                let (node, link) =
                    schedule.node_link(k).expect("evolve already checked the horizon");
                match schedule.pattern() {
                    crate::schedule::SchedulePattern::Raw { .. } => Erasure::NodeLink(node, link),
                    _ => Erasure::Single(link),
                }
            })
            .collect(),
    };

    let n_leaves = 1usize << height;
    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || {
                (
                    Counts::new(height),
                    Scratch {
                        decide_h0: vec![0; n_leaves],
                        decide_h1: vec![0; n_leaves],
                        silent: vec![false; n_leaves],
                    },
                )
            },
            |(mut counts, mut scratch), trial| {
                run_trial(trial, &setup, &mut scratch, &mut counts);
                (counts, scratch)
            },
        )
        .map(|(counts, _)| counts)
        .reduce(|| Counts::new(height), Counts::merge);

    let data_trials = trials - counts.starved;
    if data_trials == 0 {
        return Err(Error::Domain(
            "every trial starved the root; conditional error rates are undefined".into(),
        ));
    }
    let est_type_i = counts.wrong_h0 as f64 / data_trials as f64;
    let est_type_ii = counts.wrong_h1 as f64 / data_trials as f64;
    let est_starvation = counts.starved as f64 / trials as f64;
    let se = |p: f64, n: u64| (p * (1.0 - p) / n as f64).sqrt();
    let half_width_95 = 1.96
        * se(est_type_i, data_trials)
            .max(se(est_type_ii, data_trials))
            .max(se(est_starvation, trials));

    let min_prior = prior0.min(1.0 - prior0);
    let unconditional_weighted = (prior0 * counts.wrong_h0 as f64
        + (1.0 - prior0) * counts.wrong_h1 as f64
        + min_prior * counts.starved as f64)
        / trials as f64;

    Ok(McDetail {
        estimate: SimEstimate {
            trials,
            est_type_i,
            est_type_ii,
            est_starvation,
            half_width_95,
            seed,
        },
        level_silence: counts
            .silent_at_level
            .iter()
            .map(|&c| c as f64 / trials as f64)
            .collect(),
        unconditional_weighted,
        data_trials,
    })
}

/// See [`monte_carlo_detailed`]; this returns just the headline estimate.
pub fn monte_carlo(
    alpha0: f64,
    beta0: f64,
    schedule: &FailureSchedule,
    height: usize,
    trials: u64,
    seed: u64,
    prior0: f64,
) -> Result<SimEstimate> {
    Ok(monte_carlo_detailed(alpha0, beta0, schedule, height, trials, seed, prior0)?.estimate)
}
