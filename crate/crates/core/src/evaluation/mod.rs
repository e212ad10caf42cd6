//! Training, scoring, statistical comparison and the cross-validation driver.

pub mod compare;
pub mod experiment;
pub mod metrics;
pub mod rank;
pub mod report;
pub mod train;
pub mod wilcoxon;

pub use compare::{compare, format_comparison, Comparison, RankScore, ResultSet, SIGNIFICANCE};
pub use experiment::{
    padding_radius, prepare_cell, run_cell, run_experiment, CellData, CellResult, CellSeeds, ExperimentConfig,
    ExperimentResult, ExperimentSummary, MeanStd, MetricsReport,
};
pub use metrics::{confusion, metrics, ConfusionMatrix, Metrics};
pub use rank::{average_rank, descending_ranks};
pub use report::{experiment_rows, format_summary, read_results, results_header, write_results, ResultRow};
pub use train::{argmax_label, predict, stopping_epoch, train, EarlyStopping, Predictions, TrainConfig, TrainOutcome};
pub use wilcoxon::{average_ranks, wilcoxon_two_tailed, wilcoxon_with, PValueMethod, WilcoxonResult, EXACT_LIMIT};
