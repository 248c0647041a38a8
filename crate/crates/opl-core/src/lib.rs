//! Engines for studying the correlation of the directional connectivity
//! events `a -> s` and `s -> b` in a randomly oriented random graph: exact
//! enumeration at small vertex counts, path-pair combinatorics, closed-form
//! sparse-regime asymptotics and seeded Monte Carlo estimation, built to
//! cross-validate one another.

pub mod asym;
pub mod error;
pub mod exact;
pub mod graph;
pub mod mc;
pub mod pairs;
pub mod percolation;
pub mod poly;
pub mod sampling;

pub use asym::{
    find_c_roots, main_formula, quartic, quartic_discriminant, scaled_covariance_limit,
    series_limits, truncated_series, AsymptoticResult, CriticalConstants,
};
pub use error::{Error, Result};
pub use exact::{
    cov_exact, cov_from_counts, enumerate_counts, required_budget, CountsTable, DEEP_BUDGET,
    DEFAULT_BUDGET,
};
pub use graph::{
    edge_count, edge_endpoints, edge_index, events, rational, reaches, EdgeState,
    OrientedConfiguration, Params, Path, VERTEX_A, VERTEX_B, VERTEX_S,
};
pub use mc::{
    locate_sign_change, locate_sign_change_with, mc_estimate, mc_scan, McEstimate, ScanCurve,
    SignSearch, BATCH_COUNT, MIN_SAMPLES, MIN_SEARCH_BUDGET, SIGN_SIGNIFICANCE,
};
pub use pairs::{
    classify_pair, count_type1, count_type2, cov_pairsum, enum_paths, enum_paths_guarded,
    expected_paths, pair_cov, path_count, ClassLabel, ClassifiedPair, CutOff, Overlap, PairClass,
    PairSum, PairSumRow, DEFAULT_PATH_GUARD,
};
pub use percolation::percolation_prob;
pub use poly::{
    cov_polynomial, cov_polynomial_from_counts, find_critical_exact, find_critical_in_poly,
    CovariancePolynomial, RootBracket, DEFAULT_SCAN_GRID,
};
pub use sampling::{sample_oriented, RngStream};
