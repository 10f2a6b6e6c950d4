use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{IngestError, RawTable};
use crate::catalog::{QuestionCatalog, QuestionRole, SurveyQuestion, UNANSWERED};
use crate::dataset::{Dataset, DatasetError, DomainCell};

/// How the binary intention label is derived from the target questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetPolicy {
    /// Label from Q16 alone ("smoke a cigarette in the next year").
    #[default]
    Q16Only,
    /// Yes if any target question is a yes; no if all are no.
    AnyOfSix,
}

impl TargetPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetPolicy::Q16Only => "q16-only",
            TargetPolicy::AnyOfSix => "any-of-six",
        }
    }
}

impl fmt::Display for TargetPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TargetPolicy {
    type Err = IngestError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "q16-only" => Ok(TargetPolicy::Q16Only),
            "any-of-six" => Ok(TargetPolicy::AnyOfSix),
            _ => Err(IngestError::UnknownPolicy(s.to_owned())),
        }
    }
}

/// What to do with a predictor code outside its declared domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutOfDomainPolicy {
    /// Fail, listing the offending cells.
    #[default]
    Reject,
    /// Recode to 0 and count it in the summary.
    Unanswered,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub policy: TargetPolicy,
    pub rows_in: usize,
    /// Rows whose label is undefined (required target answers unanswered).
    pub dropped_undefined: usize,
    pub rows_out: usize,
    pub yes: usize,
    pub no: usize,
    /// Predictor columns absent from the input, filled with 0.
    pub missing_predictor_columns: Vec<String>,
    pub recoded_cells: usize,
}

enum Class {
    Yes,
    No,
    Undefined,
}

fn classify(q: &SurveyQuestion, code: u32) -> Class {
    if q.yes_codes.contains(&code) {
        Class::Yes
    } else if q.no_codes.contains(&code) {
        Class::No
    } else {
        Class::Undefined
    }
}

/// Builds the labelled feature matrix. X holds exactly the predictor columns
/// (multi-select expanded); target and cohort columns are excluded.
pub fn derive_target(
    table: &RawTable,
    catalog: &QuestionCatalog,
    policy: TargetPolicy,
    out_of_domain: OutOfDomainPolicy,
) -> Result<(Dataset, TargetSummary), IngestError> {
    let targets: Vec<&SurveyQuestion> = match policy {
        TargetPolicy::Q16Only => {
            let q = catalog
                .question("Q16")
                .filter(|q| q.role == QuestionRole::TargetSmokingIntention)
                .ok_or_else(|| IngestError::TargetColumnMissing("Q16".into()))?;
            vec![q]
        }
        TargetPolicy::AnyOfSix => catalog
            .with_role(QuestionRole::TargetSmokingIntention)
            .collect(),
    };
    if targets.is_empty() {
        return Err(IngestError::TargetColumnMissing(
            "<any target question>".into(),
        ));
    }
    let target_idx: Vec<usize> = targets
        .iter()
        .map(|q| {
            table
                .column_index(&q.id)
                .ok_or_else(|| IngestError::TargetColumnMissing(q.id.clone()))
        })
        .collect::<Result<_, _>>()?;

    let features = catalog.feature_columns();
    let mut missing = Vec::new();
    let feature_idx: Vec<Option<usize>> = features
        .iter()
        .map(|f| {
            let idx = table.column_index(&f.name);
            if idx.is_none() {
                missing.push(f.name.clone());
            }
            idx
        })
        .collect();

    let mut flat = Vec::with_capacity(table.n_rows() * features.len());
    let mut y = Vec::new();
    let mut row_ids = Vec::new();
    let mut dropped = 0;
    let mut recoded = 0;
    let mut bad_cells = Vec::new();

    for (row, &row_id) in table.rows.iter().zip(&table.row_ids) {
        let answers = targets
            .iter()
            .zip(&target_idx)
            .map(|(q, &i)| classify(q, row[i].unwrap_or(UNANSWERED)));
        let label = match policy {
            TargetPolicy::Q16Only => match answers.into_iter().next().unwrap() {
                Class::Yes => Some(1),
                Class::No => Some(0),
                Class::Undefined => None,
            },
            TargetPolicy::AnyOfSix => {
                let classes: Vec<Class> = answers.collect();
                if classes.iter().any(|c| matches!(c, Class::Yes)) {
                    Some(1)
                } else if classes.iter().all(|c| matches!(c, Class::No)) {
                    Some(0)
                } else {
                    None
                }
            }
        };
        let Some(label) = label else {
            dropped += 1;
            continue;
        };

        for (f, idx) in features.iter().zip(&feature_idx) {
            let code = idx.and_then(|i| row[i]).unwrap_or(UNANSWERED);
            if code != UNANSWERED && !f.allowed.contains(&code) {
                match out_of_domain {
                    OutOfDomainPolicy::Reject => {
                        bad_cells.push(DomainCell {
                            row: row_id,
                            column: f.name.clone(),
                            code,
                        });
                    }
                    OutOfDomainPolicy::Unanswered => {
                        recoded += 1;
                        flat.push(UNANSWERED);
                        continue;
                    }
                }
            }
            flat.push(code);
        }
        y.push(label);
        row_ids.push(row_id);
    }
    if !bad_cells.is_empty() {
        return Err(DatasetError::DomainViolation(bad_cells).into());
    }

    let x = Array2::from_shape_vec((y.len(), features.len()), flat).expect("row-major fill");
    let mut ds = Dataset::new(features.iter().map(|f| f.name.clone()).collect(), x, y)?
        .with_domains(features.iter().map(|f| f.allowed.clone()).collect())?;
    ds.row_ids = row_ids;

    let [no, yes] = ds.class_counts();
    let summary = TargetSummary {
        policy,
        rows_in: table.n_rows(),
        dropped_undefined: dropped,
        rows_out: ds.n_rows(),
        yes,
        no,
        missing_predictor_columns: missing,
        recoded_cells: recoded,
    };
    Ok((ds, summary))
}
