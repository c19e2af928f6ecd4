//! Monte Carlo experiments over the tree models, with mergeable moment
//! summaries and normality diagnostics.

pub mod diagnostics;
pub mod experiment;
pub mod moments;

pub use diagnostics::{chi_square_pvalue, normality, std_normal_cdf, Diagnostics};
pub use experiment::{
    run_experiment, tail_event_rate, CapPolicy, ExperimentResult, Model, SimConfig, Stat,
    TailEventRate,
};
pub use moments::{merge, MomentSummary};
