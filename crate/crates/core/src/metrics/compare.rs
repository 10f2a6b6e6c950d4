//! Train-and-score several learners on one split.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::cv::{cross_validate, CvConfig};
use super::report::{binary_report, ClassReport};
use super::MetricsError;
use crate::dataset::Dataset;
use crate::exec::Execution;
use crate::ingest::{train_test_split, SplitSpec};
use crate::ml::{ModelKind, ModelSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub kind: ModelKind,
    /// Mean cross-validated accuracy on the training split.
    pub train_score: f64,
    /// Accuracy on the held-out split.
    pub test_score: f64,
    pub test_report: ClassReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub train_rows: usize,
    pub test_rows: usize,
}

/// One line of the comparison data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub model: String,
    pub name: String,
    pub train_score: f64,
    pub test_score: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
}

pub fn compare_models(
    ds: &Dataset,
    split: &SplitSpec,
    specs: &[ModelSpec],
    cv: &CvConfig,
) -> Result<ComparisonTable, MetricsError> {
    if specs.is_empty() {
        return Err(MetricsError::NoModels);
    }
    let (train, test) = train_test_split(ds, split)?;
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let spec = spec.with_execution(cv.execution);
        let train_score = cross_validate(&spec, &train, cv)?.mean;
        let model = spec.fit(&train)?;
        let pred: Vec<u8> = model
            .predict_batch(test.x.view(), cv.execution)?
            .iter()
            .map(|p| p.label)
            .collect();
        let test_report = binary_report(&test.y, &pred)?;
        log::info!(
            "{}: cv {:.4}, test {:.4}",
            spec.kind(),
            train_score,
            test_report.accuracy
        );
        rows.push(ComparisonRow {
            kind: spec.kind(),
            train_score,
            test_score: test_report.accuracy,
            test_report,
        });
    }
    Ok(ComparisonTable {
        rows,
        train_rows: train.n_rows(),
        test_rows: test.n_rows(),
    })
}

/// Sequential counterpart used when thread count must not vary.
pub fn compare_models_sequential(
    ds: &Dataset,
    split: &SplitSpec,
    specs: &[ModelSpec],
    cv: &CvConfig,
) -> Result<ComparisonTable, MetricsError> {
    compare_models(
        ds,
        split,
        specs,
        &CvConfig {
            execution: Execution::Sequential,
            ..*cv
        },
    )
}

impl ComparisonTable {
    /// Models as columns, training and test accuracy as rows, 4 decimals.
    pub fn render(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.kind.display_name().len())
            .max()
            .unwrap_or(0)
            .max(8)
            + 2;
        let mut out = format!("{:<16}", "");
        for r in &self.rows {
            let _ = write!(out, "{:>width$}", r.kind.display_name());
        }
        out.push('\n');
        for (label, get) in [
            (
                "Training Score",
                (|r: &ComparisonRow| r.train_score) as fn(&ComparisonRow) -> f64,
            ),
            ("Test Score", |r: &ComparisonRow| r.test_score),
        ] {
            let _ = write!(out, "{label:<16}");
            for r in &self.rows {
                let _ = write!(out, "{:>width$.4}", get(r));
            }
            out.push('\n');
        }
        out
    }

    pub fn records(&self) -> Vec<ComparisonRecord> {
        self.rows
            .iter()
            .map(|r| ComparisonRecord {
                model: r.kind.name().to_string(),
                name: r.kind.display_name().to_string(),
                train_score: r.train_score,
                test_score: r.test_score,
                macro_f1: r.test_report.macro_avg.f1,
                weighted_f1: r.test_report.weighted_avg.f1,
            })
            .collect()
    }

    /// Full-precision CSV, one row per model.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), MetricsError> {
        let mut out = csv::Writer::from_writer(w);
        for rec in self.records() {
            out.serialize(rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn render_svg(&self) -> String {
        render_svg(&self.records())
    }
}

pub fn read_comparison_csv<R: Read>(r: R) -> Result<Vec<ComparisonRecord>, MetricsError> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

/// Grouped bar chart: one group per model, bars for training score, test
/// score, macro F1 and weighted F1.
pub fn render_svg(records: &[ComparisonRecord]) -> String {
    const SERIES: [(&str, &str); 4] = [
        ("Training Score", "#4c72b0"),
        ("Test Score", "#dd8452"),
        ("Macro Avg F1", "#55a868"),
        ("Weighted Avg F1", "#c44e52"),
    ];
    let (left, top, plot_h, group_w, bar_w) = (60.0, 40.0, 300.0, 150.0, 28.0);
    let width = left + group_w * records.len().max(1) as f64 + 20.0;
    let height = top + plot_h + 90.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">Accuracy by model</text>"#,
        width / 2.0
    );
    for tick in 0..=5 {
        let v = tick as f64 / 5.0;
        let y = top + plot_h * (1.0 - v);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/>"##,
            width - 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{v:.1}</text>"#,
            left - 6.0,
            y + 4.0
        );
    }
    for (g, rec) in records.iter().enumerate() {
        let x0 = left + g as f64 * group_w + (group_w - bar_w * 4.0) / 2.0;
        let values = [
            rec.train_score,
            rec.test_score,
            rec.macro_f1,
            rec.weighted_f1,
        ];
        for (k, (v, (_, colour))) in values.iter().zip(SERIES).enumerate() {
            let h = plot_h * v.clamp(0.0, 1.0);
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{}" height="{h}" fill="{colour}"><title>{:.4}</title></rect>"#,
                x0 + k as f64 * bar_w,
                top + plot_h - h,
                bar_w - 2.0,
                v
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            left + g as f64 * group_w + group_w / 2.0,
            top + plot_h + 18.0,
            rec.name
        );
    }
    for (k, (label, colour)) in SERIES.iter().enumerate() {
        let x = left + k as f64 * 140.0;
        let y = top + plot_h + 45.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{}" width="12" height="12" fill="{colour}"/>"#,
            y - 10.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{y}">{label}</text>"#, x + 16.0);
    }
    s.push_str("</svg>\n");
    s
}
