//! Empirical checks of the quantitative claims: witness searches for the
//! liminf and metastability statements, descent and Fejér properties along
//! trajectories, and witness-versus-bound comparisons.

mod report;
mod suites;
mod witness;

pub use report::{CertReport, InequalityTally, Outcome};
pub use suites::{
    check_fejer_descent, check_lemma_suite, check_uniform_closedness, check_uniform_fejer, scaled_slack,
    LemmaSuiteInput, FEJER_STRICT_SLACK, MONOTONE_SLACK,
};
pub use witness::{
    bound_margin, check_combined_omega, check_liminf_modulus, check_liminf_sequence, check_metastability_bound,
    find_combined_witness, find_liminf_witness, find_metastable_witness, first_below, MetastabilityQuery,
    DEFAULT_SEARCH_CAP, DEFAULT_TRAJECTORY_LENGTH,
};
