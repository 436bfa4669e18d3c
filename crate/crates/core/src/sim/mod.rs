//! Two independent validators of the fusion recursion: an exact
//! distributional oracle for small trees and a Monte Carlo simulator of
//! randomly pruned trees.

mod mc;
mod oracle;

pub use mc::{monte_carlo, monte_carlo_detailed, McDetail, SimEstimate};
pub use oracle::{
    exact_levels, exact_pair_distribution, OracleLevel, PairAtom, PairDistribution,
    ORACLE_HEIGHT_CAP, ORACLE_PAIR_BUDGET,
};
