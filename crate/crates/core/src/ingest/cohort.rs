use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{IngestError, RawTable};
use crate::catalog::{QuestionCatalog, QuestionRole, SurveyQuestion};

/// Which cohort-selection questions the never-smoker filter applies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortConfig {
    /// Non-smoker selection questions to skip. Defaults to `["Q59"]`: its
    /// text presupposes a purchase attempt.
    pub disabled: Vec<String>,
    /// Also require a "no" on the non-e-smoker selection question(s).
    pub non_e_smoker: bool,
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            disabled: vec!["Q59".into()],
            non_e_smoker: false,
        }
    }
}

impl CohortConfig {
    /// Toggles the Q59 "refused sale" question.
    pub fn with_q59(mut self, enabled: bool) -> Self {
        self.disabled.retain(|q| q != "Q59");
        if !enabled {
            self.disabled.push("Q59".into());
        }
        self
    }

    pub fn enabled_questions<'a>(&self, catalog: &'a QuestionCatalog) -> Vec<&'a SurveyQuestion> {
        catalog
            .questions
            .iter()
            .filter(|q| match q.role {
                QuestionRole::CohortSelectionNonSmoker => !self.disabled.contains(&q.id),
                QuestionRole::CohortSelectionNonESmoker => self.non_e_smoker,
                _ => false,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub enabled_questions: Vec<String>,
    pub rows_in: usize,
    pub rows_out: usize,
    /// Rows failing each question; a row failing several counts under each.
    pub removed_by_question: BTreeMap<String, usize>,
}

/// Keeps only rows answering the "never" / "no" code on every enabled
/// selection question. Unanswered (0 or null) does not qualify.
pub fn filter_never_smokers(
    mut table: RawTable,
    catalog: &QuestionCatalog,
    config: &CohortConfig,
) -> Result<(RawTable, CohortSummary), IngestError> {
    let enabled = config.enabled_questions(catalog);
    let mut checks = Vec::with_capacity(enabled.len());
    for q in &enabled {
        let idx = table
            .column_index(&q.id)
            .ok_or_else(|| IngestError::CohortColumnMissing(q.id.clone()))?;
        checks.push((q.id.as_str(), idx, q.pass_codes.as_slice()));
    }

    let mut removed: BTreeMap<String, usize> = checks
        .iter()
        .map(|(id, _, _)| ((*id).to_owned(), 0))
        .collect();
    let keep: Vec<bool> = table
        .rows
        .iter()
        .map(|row| {
            let mut ok = true;
            for (id, idx, pass) in &checks {
                let passed = row[*idx].is_some_and(|c| pass.contains(&c));
                if !passed {
                    *removed.get_mut(*id).unwrap() += 1;
                    ok = false;
                }
            }
            ok
        })
        .collect();

    let rows_in = table.n_rows();
    table.retain_rows(&keep);
    let summary = CohortSummary {
        enabled_questions: checks.iter().map(|(id, _, _)| (*id).to_owned()).collect(),
        rows_in,
        rows_out: table.n_rows(),
        removed_by_question: removed,
    };
    Ok((table, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{impute_nulls, parse_csv};

    fn table(csv: &str) -> RawTable {
        impute_nulls(parse_csv(csv.as_bytes(), &QuestionCatalog::nyts2018()).unwrap())
    }

    const HEAD: &str = "Q7,Q19,Q24,Q39,Q59,Q28\n";

    #[test]
    fn ever_smokers_removed() {
        let cat = QuestionCatalog::nyts2018();
        let t = table(&format!("{HEAD}1,2,2,2,1,2\n2,2,2,2,2,1\n2,2,,2,1,2\n"));
        let (out, s) = filter_never_smokers(t, &cat, &CohortConfig::default()).unwrap();
        assert_eq!(out.row_ids, vec![1]);
        assert_eq!(s.enabled_questions, ["Q7", "Q19", "Q24", "Q39"]);
        assert_eq!(s.removed_by_question["Q7"], 1);
        assert_eq!(s.removed_by_question["Q24"], 1);
        assert_eq!((s.rows_in, s.rows_out), (3, 1));
    }

    #[test]
    fn optional_questions() {
        let cat = QuestionCatalog::nyts2018();
        let csv = format!("{HEAD}2,2,2,2,2,2\n2,2,2,2,1,1\n");
        let (out, _) =
            filter_never_smokers(table(&csv), &cat, &CohortConfig::default().with_q59(true))
                .unwrap();
        assert_eq!(out.row_ids, vec![1]);
        let cfg = CohortConfig {
            non_e_smoker: true,
            ..Default::default()
        };
        let (out, _) = filter_never_smokers(table(&csv), &cat, &cfg).unwrap();
        assert_eq!(out.row_ids, vec![0]);
    }

    #[test]
    fn refiltering_is_a_no_op() {
        let cat = QuestionCatalog::nyts2018();
        let t = table(&format!("{HEAD}1,2,2,2,1,2\n2,2,2,2,2,1\n2,2,2,2,1,2\n"));
        let (once, _) = filter_never_smokers(t, &cat, &CohortConfig::default()).unwrap();
        let (twice, s) =
            filter_never_smokers(once.clone(), &cat, &CohortConfig::default()).unwrap();
        assert_eq!(once, twice);
        assert_eq!(s.rows_in, s.rows_out);
    }

    #[test]
    fn missing_selection_column() {
        let cat = QuestionCatalog::nyts2018();
        let t = table("Q7,Q19\n2,2\n");
        assert!(matches!(
            filter_never_smokers(t, &cat, &CohortConfig::default()),
            Err(IngestError::CohortColumnMissing(q)) if q == "Q24"
        ));
    }
}
