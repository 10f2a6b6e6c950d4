//! Question catalog: ids, answer domains and each question's pipeline role.
//!
//! The catalog is loaded from a TOML document (layout in
//! `docs/catalog-format.md`). Code `0` is reserved in every domain and means
//! "unanswered"; it is never listed in the document.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Deserialize;
use thiserror::Error;

/// Reserved answer code for a question that was not answered.
pub const UNANSWERED: u32 = 0;

/// Catalog profile that enables the 47-predictor check.
pub const NYTS2018_PROFILE: &str = "nyts2018";

/// Number of predictor questions in the NYTS-2018 profile.
pub const NYTS2018_PREDICTORS: usize = 47;

const FORMAT_TAG: &str = "nyts-catalog/1";
const SHIPPED_NYTS2018: &str = include_str!("../data/nyts2018.toml");

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("malformed catalog document: {0}")]
    Malformed(String),
    #[error("unsupported catalog format {found:?} (expected {expected:?})")]
    Format {
        found: String,
        expected: &'static str,
    },
    #[error("duplicate question id {0}")]
    DuplicateId(String),
    #[error("duplicate column name {0}")]
    DuplicateColumn(String),
    #[error("question {0} has no role")]
    MissingRole(String),
    #[error("question {id}: unknown role {role:?}")]
    UnknownRole { id: String, role: String },
    #[error("question {id}: unknown answer kind {kind:?}")]
    UnknownKind { id: String, kind: String },
    #[error("question {id}: invalid answer domain: {reason}")]
    InvalidDomain { id: String, reason: String },
    #[error("question {id}: {field} code {code} is not in the answer domain")]
    CodeOutsideDomain {
        id: String,
        field: &'static str,
        code: u32,
    },
    #[error("question {id}: {reason}")]
    InvalidRoleCodes { id: String, reason: String },
    #[error("nyts2018 catalog must have {expected} predictor questions, found {found}")]
    PredictorCount { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnswerKind {
    SingleChoice,
    MultiSelect,
    NumericRange,
}

impl AnswerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnswerKind::SingleChoice => "single-choice",
            AnswerKind::MultiSelect => "multi-select",
            AnswerKind::NumericRange => "numeric-range",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerOption {
    pub code: u32,
    pub label: String,
    /// Sub-column id for multi-select options.
    pub column: Option<String>,
}

/// The answer codes a question accepts. Code 0 is implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerDomain {
    pub kind: AnswerKind,
    pub options: Vec<AnswerOption>,
}

impl AnswerDomain {
    /// True for 0 and for every listed code.
    pub fn contains(&self, code: u32) -> bool {
        code == UNANSWERED || self.options.iter().any(|o| o.code == code)
    }

    pub fn codes(&self) -> impl Iterator<Item = u32> + '_ {
        self.options.iter().map(|o| o.code)
    }

    /// All codes including the reserved 0, with display labels.
    pub fn labelled_codes(&self) -> Vec<(u32, &str)> {
        std::iter::once((UNANSWERED, "unanswered"))
            .chain(self.options.iter().map(|o| (o.code, o.label.as_str())))
            .collect()
    }

    pub fn label(&self, code: u32) -> Option<&str> {
        self.options
            .iter()
            .find(|o| o.code == code)
            .map(|o| o.label.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuestionRole {
    Predictor,
    CohortSelectionNonSmoker,
    CohortSelectionNonESmoker,
    TargetSmokingIntention,
}

impl QuestionRole {
    pub fn as_str(self) -> &'static str {
        match self {
            QuestionRole::Predictor => "predictor",
            QuestionRole::CohortSelectionNonSmoker => "cohort-non-smoker",
            QuestionRole::CohortSelectionNonESmoker => "cohort-non-e-smoker",
            QuestionRole::TargetSmokingIntention => "target",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "predictor" => QuestionRole::Predictor,
            "cohort-non-smoker" => QuestionRole::CohortSelectionNonSmoker,
            "cohort-non-e-smoker" => QuestionRole::CohortSelectionNonESmoker,
            "target" => QuestionRole::TargetSmokingIntention,
            _ => return None,
        })
    }
}

impl fmt::Display for QuestionRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurveyQuestion {
    pub id: String,
    pub text: String,
    pub domain: AnswerDomain,
    pub role: QuestionRole,
    /// Cohort-selection questions: the codes meaning "never" / "no".
    pub pass_codes: Vec<u32>,
    /// Target questions: codes collapsed to the "yes" class.
    pub yes_codes: Vec<u32>,
    /// Target questions: codes collapsed to the "no" class.
    pub no_codes: Vec<u32>,
}

/// One column of the survey table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    /// `None` for a whole-question column, `Some(code)` for a multi-select
    /// sub-column that is 1 when that option was selected.
    pub option: Option<u32>,
}

impl Column {
    /// Codes allowed in this column, excluding 0.
    pub fn allowed_codes(&self, question: &SurveyQuestion) -> Vec<u32> {
        match self.option {
            Some(_) => vec![1],
            None => question.domain.codes().collect(),
        }
    }
}

impl SurveyQuestion {
    /// Table columns for this question: one per option for multi-select
    /// questions, otherwise a single column named after the id.
    pub fn columns(&self) -> Vec<Column> {
        match self.domain.kind {
            AnswerKind::MultiSelect => self
                .domain
                .options
                .iter()
                .map(|o| Column {
                    name: o
                        .column
                        .clone()
                        .unwrap_or_else(|| format!("{}_{}", self.id, o.code)),
                    option: Some(o.code),
                })
                .collect(),
            _ => vec![Column {
                name: self.id.clone(),
                option: None,
            }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionCatalog {
    pub version: String,
    pub profile: Option<String>,
    pub questions: Vec<SurveyQuestion>,
}

/// A predictor column after multi-select expansion, with its allowed codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureColumn {
    pub name: String,
    pub question: String,
    pub option: Option<u32>,
    pub allowed: Vec<u32>,
}

impl QuestionCatalog {
    /// The shipped NYTS-2018 catalog.
    pub fn nyts2018() -> Self {
        load_catalog(SHIPPED_NYTS2018).expect("shipped nyts2018 catalog is valid")
    }

    /// Source text of the shipped NYTS-2018 catalog.
    pub fn nyts2018_source() -> &'static str {
        SHIPPED_NYTS2018
    }

    pub fn is_nyts2018(&self) -> bool {
        self.profile.as_deref() == Some(NYTS2018_PROFILE)
    }

    pub fn question(&self, id: &str) -> Option<&SurveyQuestion> {
        self.questions.iter().find(|q| q.id == id)
    }

    pub fn with_role(&self, role: QuestionRole) -> impl Iterator<Item = &SurveyQuestion> {
        self.questions.iter().filter(move |q| q.role == role)
    }

    /// Predictor questions in catalog order.
    pub fn predictor_questions(&self) -> Vec<&SurveyQuestion> {
        self.with_role(QuestionRole::Predictor).collect()
    }

    /// Model input columns: predictors with multi-select questions expanded.
    pub fn feature_columns(&self) -> Vec<FeatureColumn> {
        self.predictor_questions()
            .into_iter()
            .flat_map(|q| {
                q.columns().into_iter().map(move |c| FeatureColumn {
                    allowed: c.allowed_codes(q),
                    name: c.name,
                    question: q.id.clone(),
                    option: c.option,
                })
            })
            .collect()
    }

    /// Every table column the catalog knows about, in catalog order.
    pub fn all_columns(&self) -> Vec<(Column, &SurveyQuestion)> {
        self.questions
            .iter()
            .flat_map(|q| q.columns().into_iter().map(move |c| (c, q)))
            .collect()
    }
}

/// Free-function form of [`QuestionCatalog::predictor_questions`].
pub fn predictor_questions(catalog: &QuestionCatalog) -> Vec<&SurveyQuestion> {
    catalog.predictor_questions()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    format: String,
    version: String,
    profile: Option<String>,
    #[serde(default, rename = "question")]
    questions: Vec<RawQuestion>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuestion {
    id: String,
    text: String,
    role: Option<String>,
    kind: String,
    #[serde(default)]
    options: Vec<RawOption>,
    range: Option<RawRange>,
    #[serde(default)]
    pass_codes: Vec<u32>,
    #[serde(default)]
    yes_codes: Vec<u32>,
    #[serde(default)]
    no_codes: Vec<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOption {
    code: u32,
    label: String,
    column: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange {
    min: u32,
    max: u32,
}

/// Parses and validates a catalog document.
pub fn load_catalog(source: &str) -> Result<QuestionCatalog, CatalogError> {
    let raw: RawCatalog =
        toml::from_str(source).map_err(|e| CatalogError::Malformed(e.to_string()))?;
    if raw.format != FORMAT_TAG {
        return Err(CatalogError::Format {
            found: raw.format,
            expected: FORMAT_TAG,
        });
    }

    let mut seen = HashSet::new();
    let mut questions = Vec::with_capacity(raw.questions.len());
    for rq in raw.questions {
        if !seen.insert(rq.id.clone()) {
            return Err(CatalogError::DuplicateId(rq.id));
        }
        questions.push(build_question(rq)?);
    }

    let mut columns = HashSet::new();
    for q in &questions {
        for c in q.columns() {
            if !columns.insert(c.name.clone()) {
                return Err(CatalogError::DuplicateColumn(c.name));
            }
        }
    }

    let catalog = QuestionCatalog {
        version: raw.version,
        profile: raw.profile,
        questions,
    };
    if catalog.is_nyts2018() {
        let found = catalog.predictor_questions().len();
        if found != NYTS2018_PREDICTORS {
            return Err(CatalogError::PredictorCount {
                expected: NYTS2018_PREDICTORS,
                found,
            });
        }
    }
    Ok(catalog)
}

fn build_question(rq: RawQuestion) -> Result<SurveyQuestion, CatalogError> {
    let id = rq.id;
    let role_name = rq
        .role
        .ok_or_else(|| CatalogError::MissingRole(id.clone()))?;
    let role = QuestionRole::parse(&role_name).ok_or_else(|| CatalogError::UnknownRole {
        id: id.clone(),
        role: role_name,
    })?;
    let kind = match rq.kind.as_str() {
        "single-choice" => AnswerKind::SingleChoice,
        "multi-select" => AnswerKind::MultiSelect,
        "numeric-range" => AnswerKind::NumericRange,
        _ => return Err(CatalogError::UnknownKind { id, kind: rq.kind }),
    };
    let invalid = |reason: &str| CatalogError::InvalidDomain {
        id: id.clone(),
        reason: reason.into(),
    };

    let options: Vec<AnswerOption> = match (kind, rq.range) {
        (AnswerKind::NumericRange, Some(range)) => {
            if !rq.options.is_empty() {
                return Err(invalid("numeric-range takes `range`, not `options`"));
            }
            if range.min == 0 || range.min > range.max {
                return Err(invalid("range must satisfy 1 <= min <= max"));
            }
            (range.min..=range.max)
                .map(|c| AnswerOption {
                    code: c,
                    label: c.to_string(),
                    column: None,
                })
                .collect()
        }
        (AnswerKind::NumericRange, None) => return Err(invalid("numeric-range requires `range`")),
        (_, Some(_)) => return Err(invalid("`range` is only valid for numeric-range")),
        (_, None) => rq
            .options
            .into_iter()
            .map(|o| AnswerOption {
                code: o.code,
                label: o.label,
                column: o.column,
            })
            .collect(),
    };

    let mut codes = BTreeSet::new();
    for o in &options {
        if o.code == UNANSWERED {
            return Err(invalid("code 0 is reserved for unanswered"));
        }
        if !codes.insert(o.code) {
            return Err(invalid(&format!("code {} listed twice", o.code)));
        }
        if o.column.is_some() && kind != AnswerKind::MultiSelect {
            return Err(invalid("`column` is only valid on multi-select options"));
        }
    }
    match kind {
        AnswerKind::SingleChoice if options.len() < 2 => {
            return Err(invalid("single-choice needs at least 2 codes"))
        }
        AnswerKind::MultiSelect if options.is_empty() => {
            return Err(invalid("multi-select needs at least 1 option"))
        }
        _ => {}
    }

    let domain = AnswerDomain { kind, options };
    for (field, list) in [
        ("pass", &rq.pass_codes),
        ("yes", &rq.yes_codes),
        ("no", &rq.no_codes),
    ] {
        if let Some(&code) = list
            .iter()
            .find(|&&c| c == UNANSWERED || !domain.contains(c))
        {
            return Err(CatalogError::CodeOutsideDomain { id, field, code });
        }
    }
    let role_codes = |reason: &str| CatalogError::InvalidRoleCodes {
        id: id.clone(),
        reason: reason.into(),
    };
    match role {
        QuestionRole::CohortSelectionNonSmoker | QuestionRole::CohortSelectionNonESmoker => {
            if rq.pass_codes.is_empty() {
                return Err(role_codes("cohort-selection questions need pass_codes"));
            }
        }
        QuestionRole::TargetSmokingIntention => {
            if rq.yes_codes.is_empty() || rq.no_codes.is_empty() {
                return Err(role_codes("target questions need yes_codes and no_codes"));
            }
            if rq.yes_codes.iter().any(|c| rq.no_codes.contains(c)) {
                return Err(role_codes("yes_codes and no_codes overlap"));
            }
        }
        QuestionRole::Predictor => {}
    }
    if kind == AnswerKind::MultiSelect && role != QuestionRole::Predictor {
        return Err(role_codes("multi-select questions can only be predictors"));
    }

    Ok(SurveyQuestion {
        id,
        text: rq.text,
        domain,
        role,
        pass_codes: rq.pass_codes,
        yes_codes: rq.yes_codes,
        no_codes: rq.no_codes,
    })
}
