//! Questionnaire answers to model feature vectors.
//!
//! Omitted questions encode as 0 (unanswered). Multi-select answers are lists
//! of selected option codes and expand into one 0/1 column per option.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{AnswerKind, QuestionCatalog, QuestionRole, UNANSWERED};

/// In JSON a single answer is a bare code and a multi-select answer a list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Answer {
    Single(u32),
    Multi(Vec<u32>),
}

/// Answers keyed by question id.
pub type AnswerSet = BTreeMap<String, Answer>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnswerError {
    #[error("unknown question {0}")]
    UnknownQuestion(String),
    #[error("question {0} is not a predictor")]
    NotAPredictor(String),
    #[error("question {question}: code {code} is not a valid answer")]
    OutOfDomain { question: String, code: u32 },
    #[error("question {0} takes a single code")]
    ExpectedSingle(String),
    #[error("question {0} takes a list of option codes")]
    ExpectedList(String),
}

impl AnswerError {
    /// The question id the error refers to.
    pub fn question(&self) -> &str {
        match self {
            AnswerError::UnknownQuestion(q)
            | AnswerError::NotAPredictor(q)
            | AnswerError::ExpectedSingle(q)
            | AnswerError::ExpectedList(q) => q,
            AnswerError::OutOfDomain { question, .. } => question,
        }
    }
}

/// Validates `answers` against the catalog and builds the feature vector in
/// [`QuestionCatalog::feature_columns`] order.
pub fn encode_answers(
    catalog: &QuestionCatalog,
    answers: &AnswerSet,
) -> Result<Vec<u32>, AnswerError> {
    for (id, answer) in answers {
        let q = catalog
            .question(id)
            .ok_or_else(|| AnswerError::UnknownQuestion(id.clone()))?;
        if q.role != QuestionRole::Predictor {
            return Err(AnswerError::NotAPredictor(id.clone()));
        }
        let codes: &[u32] = match (q.domain.kind, answer) {
            (AnswerKind::MultiSelect, Answer::Multi(codes)) => codes,
            (AnswerKind::MultiSelect, Answer::Single(_)) => {
                return Err(AnswerError::ExpectedList(id.clone()))
            }
            (_, Answer::Single(code)) => std::slice::from_ref(code),
            (_, Answer::Multi(_)) => return Err(AnswerError::ExpectedSingle(id.clone())),
        };
        if let Some(&code) = codes.iter().find(|&&c| !q.domain.contains(c)) {
            return Err(AnswerError::OutOfDomain {
                question: id.clone(),
                code,
            });
        }
        if q.domain.kind == AnswerKind::MultiSelect && codes.contains(&UNANSWERED) {
            return Err(AnswerError::OutOfDomain {
                question: id.clone(),
                code: UNANSWERED,
            });
        }
    }

    let mut out = Vec::new();
    for q in catalog.predictor_questions() {
        let answer = answers.get(&q.id);
        for col in q.columns() {
            let value = match (col.option, answer) {
                (_, None) => UNANSWERED,
                (Some(opt), Some(Answer::Multi(sel))) => u32::from(sel.contains(&opt)),
                (None, Some(Answer::Single(code))) => *code,
                _ => unreachable!("kinds checked above"),
            };
            out.push(value);
        }
    }
    Ok(out)
}

/// Inverse of [`encode_answers`] for a feature row: zero cells become
/// omissions. Returns `None` if the row length does not match the catalog.
pub fn answers_from_features(catalog: &QuestionCatalog, row: &[u32]) -> Option<AnswerSet> {
    let mut answers = AnswerSet::new();
    let mut cells = row.iter();
    for q in catalog.predictor_questions() {
        let cols = q.columns();
        if q.domain.kind == AnswerKind::MultiSelect {
            let mut selected = Vec::new();
            for c in &cols {
                if *cells.next()? != 0 {
                    selected.extend(c.option);
                }
            }
            if !selected.is_empty() {
                answers.insert(q.id.clone(), Answer::Multi(selected));
            }
        } else {
            let code = *cells.next()?;
            if code != UNANSWERED {
                answers.insert(q.id.clone(), Answer::Single(code));
            }
        }
    }
    cells.next().is_none().then_some(answers)
}
