//! Modelling-ready datasets and the prepared-dataset CSV format.

use std::io::{Read, Write};

use ndarray::{Array2, Axis};
use thiserror::Error;

use crate::catalog::{FeatureColumn, UNANSWERED};

/// Name of the label column in prepared CSV files.
pub const LABEL_COLUMN: &str = "__label__";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("feature matrix has {rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("{names} feature names for {cols} columns")]
    NameMismatch { names: usize, cols: usize },
    #[error("label {label} at row {row} is not 0 or 1")]
    BadLabel { row: usize, label: u32 },
    #[error("codes outside declared domains: {}", fmt_cells(.0))]
    DomainViolation(Vec<DomainCell>),
    #[error("one-hot encoding needs per-feature domains")]
    NoDomains,
    #[error("prepared CSV has no {LABEL_COLUMN} column")]
    MissingLabelColumn,
    #[error("prepared CSV line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainCell {
    pub row: usize,
    pub column: String,
    pub code: u32,
}

fn fmt_cells(cells: &[DomainCell]) -> String {
    let shown: Vec<String> = cells
        .iter()
        .take(20)
        .map(|c| format!("row {} {}={}", c.row, c.column, c.code))
        .collect();
    let more = cells.len().saturating_sub(20);
    if more > 0 {
        format!("{} (+{more} more)", shown.join(", "))
    } else {
        shown.join(", ")
    }
}

/// Integer-coded feature matrix with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    /// Allowed non-zero codes per feature; `None` leaves codes unrestricted.
    pub domains: Option<Vec<Vec<u32>>>,
    pub x: Array2<u32>,
    /// 0 = no intention, 1 = intention.
    pub y: Vec<u8>,
    /// Row index in the source table, for traceability.
    pub row_ids: Vec<usize>,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        x: Array2<u32>,
        y: Vec<u8>,
    ) -> Result<Self, DatasetError> {
        if x.nrows() != y.len() {
            return Err(DatasetError::LengthMismatch {
                rows: x.nrows(),
                labels: y.len(),
            });
        }
        if feature_names.len() != x.ncols() {
            return Err(DatasetError::NameMismatch {
                names: feature_names.len(),
                cols: x.ncols(),
            });
        }
        if let Some((row, &label)) = y.iter().enumerate().find(|(_, &l)| l > 1) {
            return Err(DatasetError::BadLabel {
                row,
                label: label.into(),
            });
        }
        let row_ids = (0..y.len()).collect();
        Ok(Dataset {
            feature_names,
            domains: None,
            x,
            y,
            row_ids,
        })
    }

    /// Builds from row vectors; convenient in tests.
    pub fn from_rows(
        feature_names: Vec<String>,
        rows: &[Vec<u32>],
        y: Vec<u8>,
    ) -> Result<Self, DatasetError> {
        let d = feature_names.len();
        let mut flat = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(DatasetError::Parse {
                    line: i,
                    reason: format!("row has {} cells, expected {d}", r.len()),
                });
            }
            flat.extend_from_slice(r);
        }
        let x = Array2::from_shape_vec((rows.len(), d), flat).expect("shape checked");
        Dataset::new(feature_names, x, y)
    }

    /// Attaches per-feature domains and checks every cell against them.
    pub fn with_domains(mut self, domains: Vec<Vec<u32>>) -> Result<Self, DatasetError> {
        if domains.len() != self.n_features() {
            return Err(DatasetError::NameMismatch {
                names: domains.len(),
                cols: self.n_features(),
            });
        }
        self.domains = Some(domains);
        self.validate_domains()?;
        Ok(self)
    }

    /// Domains taken from catalog feature columns, matched by name.
    pub fn with_catalog_columns(self, columns: &[FeatureColumn]) -> Result<Self, DatasetError> {
        let names: Vec<&str> = columns.iter().map(|c| c.name.as_str()).collect();
        if names
            != self
                .feature_names
                .iter()
                .map(String::as_str)
                .collect::<Vec<_>>()
        {
            return Err(DatasetError::NameMismatch {
                names: columns.len(),
                cols: self.n_features(),
            });
        }
        let domains = columns.iter().map(|c| c.allowed.clone()).collect();
        self.with_domains(domains)
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    /// Row counts for labels 0 and 1.
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.y.iter().filter(|&&l| l == 1).count();
        [self.y.len() - ones, ones]
    }

    /// Rows selected by position, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            domains: self.domains.clone(),
            x: self.x.select(Axis(0), rows),
            y: rows.iter().map(|&r| self.y[r]).collect(),
            row_ids: rows.iter().map(|&r| self.row_ids[r]).collect(),
        }
    }

    /// Expands each feature into one 0/1 indicator column per allowed code,
    /// named `<feature>=<code>`. Unanswered cells set no indicator. Features
    /// whose domain is just `[1]` are already indicators and are kept as is.
    pub fn one_hot(&self) -> Result<Dataset, DatasetError> {
        let domains = self.domains.as_ref().ok_or(DatasetError::NoDomains)?;
        let mut names = Vec::new();
        let mut sources = Vec::new();
        for (j, (name, domain)) in self.feature_names.iter().zip(domains).enumerate() {
            if domain.as_slice() == [1] {
                names.push(name.clone());
                sources.push((j, 1));
            } else {
                for &code in domain {
                    names.push(format!("{name}={code}"));
                    sources.push((j, code));
                }
            }
        }
        let x = Array2::from_shape_fn((self.n_rows(), names.len()), |(i, k)| {
            let (j, code) = sources[k];
            u32::from(self.x[[i, j]] == code)
        });
        let out_domains = vec![vec![1]; names.len()];
        let mut out = Dataset::new(names, x, self.y.clone())?.with_domains(out_domains)?;
        out.row_ids = self.row_ids.clone();
        Ok(out)
    }

    /// Every cell must be 0 or in its column's domain.
    pub fn validate_domains(&self) -> Result<(), DatasetError> {
        let Some(domains) = &self.domains else {
            return Ok(());
        };
        let mut bad = Vec::new();
        for (r, row) in self.x.outer_iter().enumerate() {
            for (c, &code) in row.iter().enumerate() {
                if code != UNANSWERED && !domains[c].contains(&code) {
                    bad.push(DomainCell {
                        row: self.row_ids[r],
                        column: self.feature_names[c].clone(),
                        code,
                    });
                }
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(DatasetError::DomainViolation(bad))
        }
    }

    /// Codes as reals, for the gradient-trained and Gaussian models.
    pub fn x_real(&self) -> Array2<f64> {
        self.x.mapv(f64::from)
    }

    /// Labels as reals.
    pub fn y_real(&self) -> Vec<f64> {
        self.y.iter().map(|&l| f64::from(l)).collect()
    }

    /// Writes the prepared CSV: feature columns, then `__label__`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), DatasetError> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(LABEL_COLUMN);
        wtr.write_record(&header)?;
        let mut rec = Vec::with_capacity(header.len());
        for (row, &label) in self.x.outer_iter().zip(&self.y) {
            rec.clear();
            rec.extend(row.iter().map(u32::to_string));
            rec.push(label.to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads a prepared CSV written by [`Dataset::write_csv`].
    pub fn read_csv<R: Read>(r: R) -> Result<Dataset, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let label_at = header
            .iter()
            .position(|h| h == LABEL_COLUMN)
            .ok_or(DatasetError::MissingLabelColumn)?;
        let feature_names: Vec<String> = header
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != label_at)
            .map(|(_, h)| h.clone())
            .collect();
        let d = feature_names.len();
        let mut flat = Vec::new();
        let mut y = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            for (j, cell) in rec.iter().enumerate() {
                let v: u32 = cell.trim().parse().map_err(|_| DatasetError::Parse {
                    line,
                    reason: format!("cell {:?} in column {} is not a code", cell, header[j]),
                })?;
                if j == label_at {
                    if v > 1 {
                        return Err(DatasetError::BadLabel { row: i, label: v });
                    }
                    y.push(v as u8);
                } else {
                    flat.push(v);
                }
            }
        }
        let x = Array2::from_shape_vec((y.len(), d), flat).map_err(|e| DatasetError::Parse {
            line: 0,
            reason: e.to_string(),
        })?;
        Dataset::new(feature_names, x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        Dataset::from_rows(
            vec!["a".into(), "b".into()],
            &[vec![1, 0], vec![2, 3], vec![0, 1]],
            vec![0, 1, 1],
        )
        .unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let ds = tiny();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "a,b,__label__\n1,0,0\n2,3,1\n0,1,1\n"
        );
        assert_eq!(Dataset::read_csv(&buf[..]).unwrap(), ds);
    }

    #[test]
    fn domain_violations_list_cells() {
        let err = tiny().with_domains(vec![vec![1, 2], vec![1]]).unwrap_err();
        match err {
            DatasetError::DomainViolation(cells) => {
                assert_eq!(
                    cells,
                    vec![DomainCell {
                        row: 1,
                        column: "b".into(),
                        code: 3
                    }]
                );
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn labels_must_be_binary() {
        assert!(matches!(
            Dataset::from_rows(vec!["a".into()], &[vec![1]], vec![2]),
            Err(DatasetError::BadLabel { .. })
        ));
        assert!(matches!(
            Dataset::read_csv("a\n1\n".as_bytes()),
            Err(DatasetError::MissingLabelColumn)
        ));
    }

    #[test]
    fn subset_keeps_row_ids() {
        let s = tiny().subset(&[2, 0]);
        assert_eq!(s.row_ids, vec![2, 0]);
        assert_eq!(s.y, vec![1, 0]);
        assert_eq!(s.class_counts(), [1, 1]);
    }

    #[test]
    fn one_hot_expands_codes_and_keeps_indicators() {
        let ds = tiny().with_domains(vec![vec![1, 2], vec![1, 3]]).unwrap();
        let hot = ds.one_hot().unwrap();
        assert_eq!(hot.feature_names, ["a=1", "a=2", "b=1", "b=3"]);
        assert_eq!(hot.x.row(0).to_vec(), [1, 0, 0, 0]);
        assert_eq!(hot.x.row(1).to_vec(), [0, 1, 0, 1]);
        assert_eq!(hot.x.row(2).to_vec(), [0, 0, 1, 0]);
        assert_eq!(hot.y, ds.y);

        let flags = tiny()
            .with_domains(vec![vec![1, 2], vec![1, 3]])
            .unwrap()
            .subset(&[0]);
        let again = flags.one_hot().unwrap().one_hot().unwrap();
        assert_eq!(again.feature_names, ["a=1", "a=2", "b=1", "b=3"]);
        assert!(matches!(tiny().one_hot(), Err(DatasetError::NoDomains)));
    }
}
