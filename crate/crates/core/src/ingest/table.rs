use std::collections::HashSet;
use std::io::{Read, Write};

use super::IngestError;
use crate::catalog::QuestionCatalog;

/// Survey answers as parsed: `None` is a null (empty or unparseable) cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<u32>>>,
    /// Position of each row in the original file (0 = first data row).
    pub row_ids: Vec<usize>,
    /// Header columns the catalog does not know; kept in `columns`.
    pub unmatched: Vec<String>,
}

impl RawTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn null_count(&self) -> usize {
        self.rows.iter().flatten().filter(|c| c.is_none()).count()
    }

    /// Keeps the rows whose flag is true.
    pub(crate) fn retain_rows(&mut self, keep: &[bool]) {
        let mut it = keep.iter();
        self.rows.retain(|_| *it.next().unwrap());
        let mut it = keep.iter();
        self.row_ids.retain(|_| *it.next().unwrap());
    }

    /// Writes the table as CSV; nulls become empty cells.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), IngestError> {
        let mut wtr = csv::Writer::from_writer(w);
        if self.columns.is_empty() {
            // csv refuses zero-field records; an empty header line is still a header
            let mut inner = wtr.into_inner().map_err(|e| e.into_error())?;
            inner.write_all(b"\n")?;
            for _ in &self.rows {
                inner.write_all(b"\n")?;
            }
            return Ok(());
        }
        wtr.write_record(&self.columns)?;
        let mut rec: Vec<String> = Vec::with_capacity(self.columns.len());
        for row in &self.rows {
            rec.clear();
            rec.extend(
                row.iter()
                    .map(|c| c.map(|v| v.to_string()).unwrap_or_default()),
            );
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn parse_cell(cell: &str) -> Option<u32> {
    let t = cell.trim();
    if t.is_empty() {
        return None;
    }
    if let Ok(v) = t.parse::<u32>() {
        return Some(v);
    }
    // exports sometimes write integral codes as "2.0"
    match t.parse::<f64>() {
        Ok(f) if f.fract() == 0.0 && (0.0..=f64::from(u32::MAX)).contains(&f) => Some(f as u32),
        _ => None,
    }
}

/// Parses a survey CSV. Header names matching a catalog column (ignoring
/// ASCII case) are normalised to the catalog spelling; other columns are
/// kept and listed in [`RawTable::unmatched`].
pub fn parse_csv<R: Read>(input: R, catalog: &QuestionCatalog) -> Result<RawTable, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(rec) => rec?,
        None => return Err(IngestError::MissingHeader),
    };

    let known: Vec<String> = catalog
        .all_columns()
        .into_iter()
        .map(|(c, _)| c.name)
        .collect();
    let mut columns = Vec::with_capacity(header.len());
    let mut unmatched = Vec::new();
    let mut seen = HashSet::new();
    for raw in header.iter() {
        let name = raw.trim().trim_start_matches('\u{feff}');
        let canonical = known.iter().find(|k| k.eq_ignore_ascii_case(name));
        let name = match canonical {
            Some(k) => k.clone(),
            None => {
                unmatched.push(name.to_owned());
                name.to_owned()
            }
        };
        if !seen.insert(name.clone()) {
            return Err(IngestError::DuplicateColumn(name));
        }
        columns.push(name);
    }
    if unmatched.len() == columns.len() {
        return Err(IngestError::NoCatalogColumns(unmatched));
    }

    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != columns.len() {
            return Err(IngestError::Arity {
                line: i + 2,
                expected: columns.len(),
                found: rec.len(),
            });
        }
        rows.push(rec.iter().map(parse_cell).collect::<Vec<_>>());
    }
    if rows.is_empty() {
        return Err(IngestError::NoDataRows);
    }
    let row_ids = (0..rows.len()).collect();
    Ok(RawTable {
        columns,
        rows,
        row_ids,
        unmatched,
    })
}

/// Replaces every null with code 0 (unanswered).
pub fn impute_nulls(mut table: RawTable) -> RawTable {
    for cell in table.rows.iter_mut().flatten() {
        if cell.is_none() {
            *cell = Some(0);
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cat() -> QuestionCatalog {
        QuestionCatalog::nyts2018()
    }

    #[test]
    fn blank_cell_becomes_null() {
        let t = parse_csv("Q1,Q2,Q6\n1,2,3\n4,,1\n2,1,x\n".as_bytes(), &cat()).unwrap();
        assert_eq!(t.n_rows(), 3);
        assert_eq!(t.null_count(), 2);
        assert_eq!(t.rows[1], vec![Some(4), None, Some(1)]);
        assert_eq!(t.rows[2][2], None);
    }

    #[test]
    fn extra_columns_kept_and_flagged() {
        let t = parse_csv("q1,EXTRA\n1,7\n".as_bytes(), &cat()).unwrap();
        assert_eq!(t.columns, vec!["Q1", "EXTRA"]);
        assert_eq!(t.unmatched, vec!["EXTRA"]);
    }

    #[test]
    fn header_without_catalog_columns_is_an_error() {
        match parse_csv("foo,bar\n1,2\n".as_bytes(), &cat()) {
            Err(IngestError::NoCatalogColumns(names)) => assert_eq!(names, ["foo", "bar"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(
            parse_csv("".as_bytes(), &cat()),
            Err(IngestError::MissingHeader)
        ));
        assert!(matches!(
            parse_csv("Q1,Q2\n".as_bytes(), &cat()),
            Err(IngestError::NoDataRows)
        ));
        assert!(matches!(
            parse_csv("Q1,Q2\n1,2\n1\n".as_bytes(), &cat()),
            Err(IngestError::Arity {
                line: 3,
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn impute_examples() {
        let t = RawTable {
            columns: vec!["a".into(), "b".into(), "c".into()],
            rows: vec![vec![Some(1), None, Some(3)], vec![None, None, None]],
            row_ids: vec![0, 1],
            unmatched: vec![],
        };
        let out = impute_nulls(t.clone());
        assert_eq!(out.rows[0], vec![Some(1), Some(0), Some(3)]);
        assert_eq!(out.rows[1], vec![Some(0); 3]);
        assert_eq!(impute_nulls(out.clone()), out);
    }

    proptest! {
        #[test]
        fn impute_is_idempotent_and_preserves_values(
            rows in prop::collection::vec(prop::collection::vec(prop::option::of(0u32..9), 4), 1..20)
        ) {
            let t = RawTable {
                columns: (0..4).map(|i| format!("c{i}")).collect(),
                row_ids: (0..rows.len()).collect(),
                rows: rows.clone(),
                unmatched: vec![],
            };
            let once = impute_nulls(t);
            prop_assert_eq!(once.null_count(), 0);
            for (orig, new) in rows.iter().zip(&once.rows) {
                for (a, b) in orig.iter().zip(new) {
                    prop_assert_eq!(b.unwrap(), a.unwrap_or(0));
                }
            }
            prop_assert_eq!(impute_nulls(once.clone()), once);
        }
    }
}
