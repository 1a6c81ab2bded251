//! Experiment harness: synthetic generators, configs, fold runs, learning
//! curves and paired comparisons.

mod config;
mod curves;
mod experiment;
mod stats;
mod synth;

pub use config::{Algorithm, AlgorithmConfig, ExperimentConfig, TaskConfig};
pub use curves::{curves_from_csv, curves_to_csv, curves_to_svg, mean_curves, read_curves, LearningCurve, CSV_HEADER};
pub use experiment::{
    algorithm_seed, initial_seed, run_experiment, run_fold, run_jobs, run_loaded, run_log, task_folds, thread_limit,
    ExperimentOutput, LoadedTask, RunRecord, THREADS_ENV,
};
pub use stats::{
    incomplete_beta, ln_gamma, paired_t_test, paired_verdict, summarize, summary_csv, summary_text, t_cdf,
    two_tailed_p, ComparisonPoints, ComparisonReport, PointResult, Tally, Verdict,
};
pub use synth::{
    generate_synthetic_classification, generate_synthetic_wrapper, Ambiguity, ClassificationSpec, WrapperSpec,
};
