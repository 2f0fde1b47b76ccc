//! Evaluation harness: protocols, metrics, benchmarks, importances, projections, reports.

pub mod bench;
pub mod importance;
pub mod metrics;
pub mod pca;
pub mod report;
pub mod search;
pub mod stats;

pub use bench::{
    benchmark_lock, measure_model_memory, measure_throughput, resident_set_bytes, MemoryUsage, Throughput,
};
pub use importance::{permutation_importance, PERMUTATION_SHUFFLES};
pub use metrics::{accuracy, macro_f1, macro_f1_detailed, MacroF1};
pub use pca::{pca, pca_project, write_projection, Projection};
pub use report::{
    emit_report, format_fixed, format_scientific, metric_records, render_records, render_table, MetricRecord,
    RECORDS_FILE, TABLE_FILE,
};
pub use search::{
    cross_validate, evaluate, nested_cv, repeated_holdout, EvalEntry, Protocol, RoundOutcome, SearchBudget,
    HOLDOUT_FRACTIONS,
};
pub use stats::{confidence_interval_99, MetricSummary};
