use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{
    derive_target, filter_never_smokers, impute_nulls, parse_csv, CohortConfig, CohortSummary,
    IngestError, OutOfDomainPolicy, TargetPolicy, TargetSummary,
};
use crate::catalog::QuestionCatalog;
use crate::dataset::{Dataset, LABEL_COLUMN};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrepareConfig {
    pub policy: TargetPolicy,
    pub cohort: CohortConfig,
    pub out_of_domain: OutOfDomainPolicy,
}

/// Row counts per stage; written next to the prepared CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreparationReport {
    pub catalog_version: String,
    pub config: PrepareConfig,
    /// Input was already a prepared dataset and was passed through.
    pub already_prepared: bool,
    pub input_rows: usize,
    pub input_columns: usize,
    pub unmatched_columns: Vec<String>,
    pub imputed_cells: usize,
    pub cohort: Option<CohortSummary>,
    pub target: Option<TargetSummary>,
    pub output_rows: usize,
    pub output_features: usize,
    pub yes: usize,
    pub no: usize,
}

/// Parse, impute, filter the never-smoker cohort and derive labels.
///
/// Input that already carries a `__label__` column is treated as prepared:
/// it is validated against the catalog and returned unchanged.
pub fn prepare(
    mut input: impl Read,
    catalog: &QuestionCatalog,
    config: &PrepareConfig,
) -> Result<(Dataset, PreparationReport), IngestError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let first_line = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
    let is_prepared = String::from_utf8_lossy(first_line)
        .split(',')
        .any(|h| h.trim().trim_matches('"') == LABEL_COLUMN);

    if is_prepared {
        let ds = Dataset::read_csv(&bytes[..])?.with_catalog_columns(&catalog.feature_columns())?;
        let [no, yes] = ds.class_counts();
        let report = PreparationReport {
            catalog_version: catalog.version.clone(),
            config: config.clone(),
            already_prepared: true,
            input_rows: ds.n_rows(),
            input_columns: ds.n_features() + 1,
            unmatched_columns: Vec::new(),
            imputed_cells: 0,
            cohort: None,
            target: None,
            output_rows: ds.n_rows(),
            output_features: ds.n_features(),
            yes,
            no,
        };
        return Ok((ds, report));
    }

    let raw = parse_csv(&bytes[..], catalog)?;
    let input_rows = raw.n_rows();
    let input_columns = raw.columns.len();
    let unmatched_columns = raw.unmatched.clone();
    let imputed_cells = raw.null_count();
    let table = impute_nulls(raw);
    log::info!("parsed {input_rows} rows, imputed {imputed_cells} null cells");

    let (cohort_table, cohort) = filter_never_smokers(table, catalog, &config.cohort)?;
    log::info!(
        "never-smoker cohort: {} of {} rows",
        cohort.rows_out,
        cohort.rows_in
    );

    let (ds, target) = derive_target(&cohort_table, catalog, config.policy, config.out_of_domain)?;
    if target.dropped_undefined > 0 {
        log::warn!(
            "dropped {} rows with an undefined {} label",
            target.dropped_undefined,
            config.policy
        );
    }

    let report = PreparationReport {
        catalog_version: catalog.version.clone(),
        config: config.clone(),
        already_prepared: false,
        input_rows,
        input_columns,
        unmatched_columns,
        imputed_cells,
        output_rows: ds.n_rows(),
        output_features: ds.n_features(),
        yes: target.yes,
        no: target.no,
        cohort: Some(cohort),
        target: Some(target),
    };
    Ok((ds, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{generate_synthetic, SignalConfig};

    #[test]
    fn synthetic_prepare_counts_reconcile() {
        let cat = QuestionCatalog::nyts2018();
        let sig: SignalConfig = "Q6=1,Q27=1,noise=1".parse().unwrap();
        let mut csv = Vec::new();
        generate_synthetic(1000, &cat, &sig, 9)
            .unwrap()
            .write_csv(&mut csv)
            .unwrap();
        let (ds, rep) = prepare(&csv[..], &cat, &PrepareConfig::default()).unwrap();
        let cohort = rep.cohort.as_ref().unwrap();
        let target = rep.target.as_ref().unwrap();
        assert_eq!(rep.input_rows, 1000);
        assert_eq!(target.rows_in, cohort.rows_out);
        assert_eq!(ds.n_rows(), cohort.rows_out - target.dropped_undefined);
        assert_eq!(rep.yes + rep.no, ds.n_rows());

        let mut prepared = Vec::new();
        ds.write_csv(&mut prepared).unwrap();
        let (again, rep2) = prepare(&prepared[..], &cat, &PrepareConfig::default()).unwrap();
        assert!(rep2.already_prepared);
        let mut prepared2 = Vec::new();
        again.write_csv(&mut prepared2).unwrap();
        assert_eq!(prepared, prepared2);
    }
}
