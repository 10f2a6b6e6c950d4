use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nyts_core::answers::{encode_answers, AnswerError, AnswerSet};
use nyts_core::ml::PredictError;
use nyts_core::{ClassifierModel, PredictionResult, QuestionCatalog};
use serde::Serialize;

use crate::api::QuestionList;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    /// Origins allowed by CORS; `*` allows any.
    pub allowed_origins: Vec<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            allowed_origins: vec![
                "http://localhost:5173".into(),
                "http://127.0.0.1:5173".into(),
            ],
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("model expects features [{model}] but the catalog produces [{catalog}]")]
    FeatureMismatch { model: String, catalog: String },
    #[error("invalid CORS origin `{0}`")]
    BadOrigin(String),
}

#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: ClassifierModel,
    /// `sha256:<digest>` of the model file.
    pub id: String,
}

/// Request counters. Rejections are counted before any model call, so
/// `inferences` only grows for submissions that passed validation.
#[derive(Debug, Default)]
pub struct Counters {
    pub predict_requests: AtomicU64,
    pub malformed: AtomicU64,
    pub invalid: AtomicU64,
    pub unavailable: AtomicU64,
    pub inferences: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct CountersSnapshot {
    pub predict_requests: u64,
    pub malformed: u64,
    pub invalid: u64,
    pub unavailable: u64,
    pub inferences: u64,
}

impl Counters {
    pub fn snapshot(&self) -> CountersSnapshot {
        let get = |c: &AtomicU64| c.load(Ordering::Relaxed);
        CountersSnapshot {
            predict_requests: get(&self.predict_requests),
            malformed: get(&self.malformed),
            invalid: get(&self.invalid),
            unavailable: get(&self.unavailable),
            inferences: get(&self.inferences),
        }
    }

    pub(crate) fn bump(c: &AtomicU64) {
        c.fetch_add(1, Ordering::Relaxed);
    }
}

#[derive(Debug, PartialEq)]
pub enum PredictFailure {
    NoModel,
    Answer(AnswerError),
    Input(PredictError),
}

struct Inner {
    catalog: QuestionCatalog,
    model: Option<LoadedModel>,
    questions_json: Vec<u8>,
    counters: Counters,
}

/// Immutable catalog and model shared by every request.
#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    /// Checks that the model's inputs are exactly the catalog's feature
    /// columns, then pre-renders the question list.
    pub fn new(catalog: QuestionCatalog, model: Option<LoadedModel>) -> Result<Self, ServiceError> {
        if let Some(m) = &model {
            let expected: Vec<String> = catalog
                .feature_columns()
                .into_iter()
                .map(|c| c.name)
                .collect();
            if m.model.meta.feature_names != expected {
                return Err(ServiceError::FeatureMismatch {
                    model: m.model.meta.feature_names.join(","),
                    catalog: expected.join(","),
                });
            }
            let trained_on = &m.model.meta.catalog_version;
            if !trained_on.is_empty() && *trained_on != catalog.version {
                log::warn!(
                    "model was trained against catalog {trained_on}, serving catalog {}",
                    catalog.version
                );
            }
        }
        let questions_json = serde_json::to_vec(&QuestionList::from_catalog(&catalog))
            .expect("question list serialises");
        Ok(AppState(Arc::new(Inner {
            catalog,
            model,
            questions_json,
            counters: Counters::default(),
        })))
    }

    pub fn catalog(&self) -> &QuestionCatalog {
        &self.0.catalog
    }

    pub fn model(&self) -> Option<&LoadedModel> {
        self.0.model.as_ref()
    }

    pub fn counters(&self) -> &Counters {
        &self.0.counters
    }

    pub(crate) fn questions_json(&self) -> &[u8] {
        &self.0.questions_json
    }

    /// Validates the answers, encodes them in catalog order and runs the
    /// model. Nothing reaches the model unless every check passes.
    pub fn predict(&self, answers: &AnswerSet) -> Result<PredictionResult, PredictFailure> {
        let loaded = self.model().ok_or(PredictFailure::NoModel)?;
        let x = encode_answers(self.catalog(), answers).map_err(PredictFailure::Answer)?;
        loaded
            .model
            .check_input(&x)
            .map_err(PredictFailure::Input)?;
        Counters::bump(&self.counters().inferences);
        loaded.model.predict(&x).map_err(PredictFailure::Input)
    }
}
