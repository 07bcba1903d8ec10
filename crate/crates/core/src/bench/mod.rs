//! Synthetic benchmark: data generation, repeated experiments, reports.

pub mod consistency;
pub mod report;
pub mod suite;
pub mod synthetic;

pub use consistency::{run_weight_consistency, ConsistencyResult, OracleFeatures, TauPoint};
pub use report::{emit_consistency_report, emit_report, results_csv, summary_csv, weights_csv};
pub use suite::{
    compare_naive_weights, run_synthetic_suite, with_thread_cap, ExperimentResult, Method, NaiveComparison,
    RepFailure, ResultRow,
};
pub use synthetic::{generate_synthetic, sample_dgp, Coefficients, SyntheticConfig, SyntheticData};
