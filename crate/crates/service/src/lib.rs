//! HTTP front end for a trained smoking-intention model.
//!
//! | method | path             | purpose                                   |
//! |--------|------------------|-------------------------------------------|
//! | GET    | `/api/questions` | predictor questions with answer options   |
//! | POST   | `/api/predict`   | answers in, probability and label out     |
//! | GET    | `/api/health`    | `ok` with a model loaded, else `degraded` |
//! | GET    | `/api/metrics`   | request counters                          |
//!
//! The model runs in-process; [`AppState::predict`] is the seam where an
//! external inference process could be substituted.

mod api;
mod state;

pub use api::{router, serve, ErrorBody, HealthResponse, PredictionResponse, QuestionList};
pub use state::{
    AppState, Counters, CountersSnapshot, LoadedModel, PredictFailure, ServiceConfig, ServiceError,
};
