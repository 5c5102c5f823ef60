//! Fluctuation-relation engine: exact laws of the contraction count `g`,
//! Monte-Carlo histograms, and the band checks between them.

mod alpha;
mod exact;
mod monte_carlo;
mod report;

pub use alpha::{
    alpha_bounds_check, alpha_of, fold_preserves_regions, verify_fr_irreversible, AlphaReport, IrreversibleReport,
    MAX_ALPHA_STEPS,
};
pub use exact::{
    brute_force_distribution, exact_distribution, exact_distributions, Start, SymbolDistribution,
    MAX_BRUTE_FORCE_STEPS, MAX_DP_STEPS,
};
pub use monte_carlo::{monte_carlo_distribution, wilson_interval, MonteCarloDistribution};
pub use report::{
    compare_histogram, empirical_fr_report, fr_report, ratio_is_exact, BinCheck, EmpiricalFrReport, EmpiricalFrRow,
    FrReport, FrRow, MIN_BIN_COUNT, SIGMAS,
};
