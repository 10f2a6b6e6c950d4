//! Data preparation: raw survey CSV to a modelling-ready [`Dataset`].
//!
//! Stages run in order: [`parse_csv`], [`impute_nulls`],
//! [`filter_never_smokers`], [`derive_target`]; [`prepare`] chains them and
//! produces a [`PreparationReport`]. [`train_test_split`] and
//! [`generate_synthetic`] complete the module.
//!
//! [`Dataset`]: crate::dataset::Dataset

mod cohort;
mod prepare;
mod split;
mod synth;
mod table;
mod target;

use thiserror::Error;

pub use cohort::{filter_never_smokers, CohortConfig, CohortSummary};
pub use prepare::{prepare, PreparationReport, PrepareConfig};
pub use split::{train_test_split, SplitSpec};
pub use synth::{generate_synthetic, SignalConfig};
pub use table::{impute_nulls, parse_csv, RawTable};
pub use target::{derive_target, OutOfDomainPolicy, TargetPolicy, TargetSummary};

use crate::dataset::DatasetError;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input has no header row")]
    MissingHeader,
    #[error("input has no data rows")]
    NoDataRows,
    #[error("line {line}: expected {expected} cells, found {found}")]
    Arity {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate column {0} in header")]
    DuplicateColumn(String),
    #[error("no header column matches the catalog; unmatched: {}", .0.join(", "))]
    NoCatalogColumns(Vec<String>),
    #[error("cohort-selection column {0} is absent from the table")]
    CohortColumnMissing(String),
    #[error("target column {0} is absent from the table")]
    TargetColumnMissing(String),
    #[error("unknown target policy {0:?} (expected q16-only or any-of-six)")]
    UnknownPolicy(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("stratified split impossible: class {class} has {count} row(s)")]
    ClassTooSmall { class: u8, count: usize },
    #[error("signal refers to {0}, which is not a predictor question")]
    SignalQuestion(String),
    #[error("invalid signal config: {0}")]
    InvalidSignal(String),
    #[error("row count must be at least 1")]
    ZeroRows,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
