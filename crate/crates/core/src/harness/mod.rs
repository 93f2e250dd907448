//! Baselines, experiment orchestration, and result tables.

mod aggregate;
mod dataset;
mod experiment;
mod random_search;
mod report;

pub use aggregate::{
    aggregate, final_scores, read_external_scores, FinalScore, MethodSummary, Metric, MetricStats, SummaryTable,
};
pub use dataset::{read_dataset, sample_prompts, tokenize_entries, Categorized, DatasetEntry};
pub use experiment::{
    load_records, run_experiment, run_unit, ExperimentConfig, ExperimentOutcome, FinalBest, Method, RunRecord,
    UnitStatus,
};
pub use random_search::{random_search, SearchOutcome};
pub use report::{render, ReportFormat};
