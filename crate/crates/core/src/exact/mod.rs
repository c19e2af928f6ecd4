//! Exact expectations, variances and distributions for `T_n` and the
//! clock-stopped trees.

pub mod census;
pub mod clock;
pub mod fdist;
pub mod rational;
pub mod tables;

pub use census::{
    expected_large_clades, expected_subtree_count, expected_zk, expected_zk_quoted,
    green_root_probability,
};
pub use clock::{
    chain_green_prob, ct_lambda_size_pmf, e_big_f_ct_lambda, e_f_ct_lambda,
    e_f_ct_lambda_displayed, e_fk_ct, e_fk_ct_difference, e_fk_ct_lambda, e_fk_ct_lambda_displayed,
    genfunc_residual, kummer_1f1_unit, rising_factorial, SeriesValue,
};
pub use fdist::{
    build_f_dist, build_f_dist_with_limit, count_moments, CountMoments, FDist, DEFAULT_FDIST_LIMIT,
};
pub use rational::{RationalTables, RATIONAL_NMAX};
pub use tables::{
    alpha_closed, alpha_series, alpha_series_from, format_sig17, CutoffTables, ExactTables,
    DEFAULT_PSI_MAX,
};
