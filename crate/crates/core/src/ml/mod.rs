//! Learners and the shared classifier interface.

pub mod entropy;
pub mod forest;
pub mod gbm;
mod gd;
pub mod id3;
pub mod linear;
pub mod logistic;
mod model;
pub mod naive_bayes;
pub mod regression_tree;
mod weights;

pub use gd::{GdConfig, GdReport};
pub use model::{
    ClassifierModel, LearnerConfig, ModelKind, ModelMeta, ModelParams, ModelSpec, PredictionResult,
};
pub use weights::{Scaler, WeightVector};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("{rows} feature rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("label {0} is not 0 or 1")]
    NonBinaryLabel(f64),
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("loss became non-finite at iteration {iteration}")]
    Diverged { iteration: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PredictError {
    #[error("expected {expected} features, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("code {code} is outside the domain of {feature}")]
    OutOfDomain { feature: String, code: u32 },
}

pub(crate) fn check_xy(rows: usize, labels: usize) -> Result<(), FitError> {
    if rows != labels {
        return Err(FitError::LengthMismatch { rows, labels });
    }
    if rows == 0 {
        return Err(FitError::EmptyTrainingSet);
    }
    Ok(())
}
