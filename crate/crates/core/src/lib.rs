//! Detection performance of balanced binary relay trees whose nodes and
//! links fail at random.
//!
//! A tree of N = 2^h sensors makes a binary decision about one of two
//! hypotheses. Each level fuses pairs of child decisions (OR/AND, chosen
//! by which error currently dominates) and forwards the result upward;
//! failed units simply fall silent, so a parent may receive two messages,
//! one, or none. The state of a level is the triplet (α, β, q): type I
//! error, type II error, and the probability a message is missing.
//!
//! The crate tracks that triplet level by level ([`evolve`]), classifies
//! where it sits relative to the contraction regions that guarantee both
//! errors shrink ([`classify`]), turns trajectories into detection-error
//! bounds of the form c·√N ([`bounds`]), and cross-checks everything
//! against an exact pair-distribution oracle and a Monte Carlo simulator
//! ([`sim`]).
//!
//! Error probabilities are carried as [`Ext`] (an f64 mantissa with a
//! separate i64 exponent): at height 20 both errors sit near 2^-4000,
//! far below what f64 can represent.

pub mod bounds;
mod error;
pub mod ext;
mod fit;
pub mod geometry;
mod schedule;
pub mod sim;
mod trajectory;
mod triplet;

pub use error::{Error, Result};
pub use ext::Ext;
pub use fit::ols_slope;
pub use geometry::{
    b_upper_boundary, check_flip, classify, in_r_with_tol, ru_upper_boundary,
    verify_invariance, InvarianceReport, RegionLabel,
};
pub use schedule::{FailureSchedule, SchedulePattern};
pub use trajectory::{evolve, LevelRecord, Trajectory};
pub use triplet::{
    fuse_step, local_failure_prob, silence_step, total_error, weighted_error, ErrorTriplet,
};

pub use bounds::{
    bounds_report, bounds_report_with_c, check_step_ratios, classify_decay, estimate_c,
    required_sensors, sandwich_bounds, upper_bound_bits, weighted_sandwich_bounds, BoundsReport,
    DecayClass, Parity, SandwichBounds, StepRatioReport, StepRatioRow, DECAY_THRESHOLD,
};
pub use sim::{
    exact_levels, exact_pair_distribution, monte_carlo, monte_carlo_detailed, McDetail,
    OracleLevel, PairAtom, PairDistribution, SimEstimate, ORACLE_HEIGHT_CAP, ORACLE_PAIR_BUDGET,
};
