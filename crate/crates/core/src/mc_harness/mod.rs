//! Monte Carlo experiments comparing finite-sample estimators with simulated
//! limits, and their reports.

pub mod empirical;
pub mod report;
pub mod runners;

pub use empirical::{ks_distance, ks_samples, EmpiricalDist, QuantileSummary};
pub use report::{
    mode_count, Comparison, MCReport, Relation, RuleOutcome, TieCounts, Timings, REPORT_SCHEMA,
};
pub use runners::{
    pk_check, run_boundary_experiment, run_break_experiment, run_corollary1, run_corollary2,
    run_corollary3, run_limit_sample, run_pk_check, run_value_convergence, run_weakid_experiment,
    BoundaryRun, BreakRun, McOptions, PkSummary, ValueDesign, WeakIdRun, CONTRAST_N,
};
