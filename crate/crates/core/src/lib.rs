//! Survey-to-prediction toolkit for youth smoking intention.
//!
//! The crate covers the whole modelling pipeline on integer-coded survey
//! answers:
//!
//! * [`catalog`]: the question catalog (ids, answer domains, pipeline roles).
//! * [`ingest`]: CSV parsing, null imputation, cohort filtering, target
//!   derivation, train/test splitting and a synthetic survey generator.
//! * [`ml`]: linear and logistic regression trained by gradient descent,
//!   Gaussian naive Bayes, ID3 decision trees, random forests and gradient
//!   boosting, all behind [`ml::ClassifierModel`].
//! * [`metrics`]: confusion matrices, per-class reports, cross-validation and
//!   model comparison tables.
//! * [`persistence`]: the checksummed `.imodel` text format.
//!
//! Data-parallel loops go through [`exec::Execution`]; with the `parallel`
//! feature they run on rayon, otherwise on the calling thread. Both paths
//! produce bit-identical results.

pub mod answers;
pub mod catalog;
pub mod dataset;
pub mod exec;
pub mod ingest;
pub mod metrics;
pub mod ml;
pub mod persistence;

pub use catalog::{load_catalog, QuestionCatalog, QuestionRole, SurveyQuestion};
pub use dataset::Dataset;
pub use exec::Execution;
pub use ml::{ClassifierModel, ModelKind, ModelSpec, PredictionResult};
