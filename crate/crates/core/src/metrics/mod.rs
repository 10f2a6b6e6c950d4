//! Evaluation: confusion counts, per-class reports, cross-validation and
//! model comparison.

mod compare;
mod confusion;
mod cv;
mod report;

pub use compare::{
    compare_models, compare_models_sequential, read_comparison_csv, render_svg, ComparisonRecord,
    ComparisonRow, ComparisonTable,
};
pub use confusion::{accuracy, confusion, confusion_binary, BinaryCounts, ConfusionMatrix};
pub use cv::{cross_validate, kfold_assignments, CvConfig, CvResult};
pub use report::{
    binary_report, f1_score, precision_recall_f1, report, report_with_labels, Averages,
    ClassMetrics, ClassReport, ZeroDivision,
};

use crate::ingest::IngestError;
use crate::ml::{FitError, PredictError};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("no predictions to score")]
    Empty,
    #[error("{truth} observed labels but {predicted} predictions")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("label {0} is not in the class set")]
    UnknownLabel(u32),
    #[error("cannot make {k} folds from {rows} rows (need 2 <= k <= rows)")]
    InvalidFolds { k: usize, rows: usize },
    #[error("class {class} has {rows} rows, so some of the {k} stratified folds would lack it")]
    ClassMissingFromFold { class: u8, rows: usize, k: usize },
    #[error("no models to compare")]
    NoModels,
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    Split(#[from] IngestError),
    #[error("comparison file: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
