use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::confusion::{accuracy, confusion, ConfusionMatrix};
use super::MetricsError;

/// Which metrics hit a zero denominator and were reported as 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroDivision {
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
}

impl ZeroDivision {
    pub fn any(self) -> bool {
        self.precision || self.recall || self.f1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: u32,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    pub zero_division: ZeroDivision,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub classes: Vec<ClassMetrics>,
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    pub accuracy: f64,
    pub total: u64,
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// Harmonic mean of precision and recall; `(0, true)` when both are zero.
pub fn f1_score(precision: f64, recall: f64) -> (f64, bool) {
    let den = precision + recall;
    if den == 0.0 {
        (0.0, true)
    } else {
        (2.0 * precision * recall / den, false)
    }
}

pub fn precision_recall_f1(cm: &ConfusionMatrix, class: u32) -> Option<ClassMetrics> {
    let c = cm.one_vs_rest(class)?;
    let (precision, zp) = ratio(c.tp, c.tp + c.fp);
    let (recall, zr) = ratio(c.tp, c.tp + c.fn_);
    let (f1, zf) = f1_score(precision, recall);
    Some(ClassMetrics {
        label: class,
        precision,
        recall,
        f1,
        support: c.tp + c.fn_,
        zero_division: ZeroDivision {
            precision: zp,
            recall: zr,
            f1: zf,
        },
    })
}

/// Report over the labels seen in either vector.
pub fn report(y_true: &[u32], y_pred: &[u32]) -> Result<ClassReport, MetricsError> {
    let mut labels: Vec<u32> = y_true.iter().chain(y_pred).copied().collect();
    labels.sort_unstable();
    labels.dedup();
    report_with_labels(y_true, y_pred, &labels)
}

pub fn report_with_labels(
    y_true: &[u32],
    y_pred: &[u32],
    labels: &[u32],
) -> Result<ClassReport, MetricsError> {
    Ok(ClassReport::from_confusion(&confusion(
        y_true, y_pred, labels,
    )?))
}

/// Report with both binary classes present even when one never occurs.
pub fn binary_report(y_true: &[u8], y_pred: &[u8]) -> Result<ClassReport, MetricsError> {
    let widen = |v: &[u8]| v.iter().map(|&b| u32::from(b)).collect::<Vec<_>>();
    report_with_labels(&widen(y_true), &widen(y_pred), &[0, 1])
}

impl ClassReport {
    pub fn from_confusion(cm: &ConfusionMatrix) -> Self {
        let classes: Vec<ClassMetrics> = cm
            .labels
            .iter()
            .map(|&l| precision_recall_f1(cm, l).expect("label comes from the matrix"))
            .collect();
        let total = cm.total();
        let k = classes.len() as f64;
        let macro_avg = Averages {
            precision: classes.iter().map(|c| c.precision).sum::<f64>() / k,
            recall: classes.iter().map(|c| c.recall).sum::<f64>() / k,
            f1: classes.iter().map(|c| c.f1).sum::<f64>() / k,
            support: total,
        };
        let weighted = |get: fn(&ClassMetrics) -> f64| {
            classes
                .iter()
                .map(|c| get(c) * c.support as f64)
                .sum::<f64>()
                / total as f64
        };
        let weighted_avg = Averages {
            precision: weighted(|c| c.precision),
            recall: weighted(|c| c.recall),
            f1: weighted(|c| c.f1),
            support: total,
        };
        ClassReport {
            accuracy: accuracy(cm),
            classes,
            macro_avg,
            weighted_avg,
            total,
        }
    }

    pub fn class(&self, label: u32) -> Option<&ClassMetrics> {
        self.classes.iter().find(|c| c.label == label)
    }

    /// Plain-text table rounded to two decimals. Rows follow `names`; classes
    /// not named there are listed afterwards under their numeric label.
    pub fn render(&self, names: &[(u32, &str)]) -> String {
        let mut rows: Vec<(String, &ClassMetrics)> = Vec::new();
        for (label, name) in names {
            if let Some(c) = self.class(*label) {
                rows.push((name.to_string(), c));
            }
        }
        for c in &self.classes {
            if !names.iter().any(|(l, _)| *l == c.label) {
                rows.push((c.label.to_string(), c));
            }
        }
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<14}{:>10}{:>10}{:>10}{:>8}",
            "", "Precision", "Recall", "F1-Score", "Cases"
        );
        for (name, c) in rows {
            let flag = if c.zero_division.any() { " *" } else { "" };
            let _ = writeln!(
                out,
                "{:<14}{:>10.2}{:>10.2}{:>10.2}{:>8}{flag}",
                name, c.precision, c.recall, c.f1, c.support
            );
        }
        for (name, a) in [
            ("Macro Avg", &self.macro_avg),
            ("Weighted Avg", &self.weighted_avg),
        ] {
            let _ = writeln!(
                out,
                "{:<14}{:>10.2}{:>10.2}{:>10.2}{:>8}",
                name, a.precision, a.recall, a.f1, a.support
            );
        }
        let _ = writeln!(
            out,
            "{:<14}{:>30.2}{:>8}",
            "Accuracy", self.accuracy, self.total
        );
        if self.classes.iter().any(|c| c.zero_division.any()) {
            out.push_str("* a zero denominator was reported as 0\n");
        }
        out
    }

    /// [`Self::render`] with the survey's Yes/No row names.
    pub fn render_binary(&self) -> String {
        self.render(&[(1, "Yes"), (0, "No")])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_rounds_like_the_gb_yes_row() {
        let (f1, flagged) = f1_score(0.71, 0.37);
        assert!(!flagged);
        assert!((f1 - 0.486_481_481_481_481_5).abs() < 1e-12);
        assert_eq!(format!("{f1:.2}"), "0.49");
    }

    #[test]
    fn equal_precision_recall() {
        assert!((f1_score(0.8, 0.8).0 - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_support_class_is_flagged() {
        let r = report_with_labels(&[0, 0], &[0, 0], &[0, 1]).unwrap();
        let yes = r.class(1).unwrap();
        assert_eq!((yes.precision, yes.recall, yes.f1), (0.0, 0.0, 0.0));
        assert!(yes.zero_division.precision && yes.zero_division.recall && yes.zero_division.f1);
        assert!(r.render_binary().contains('*'));
    }

    #[test]
    fn single_class_perfect() {
        let r = report(&[1, 1, 1], &[1, 1, 1]).unwrap();
        assert_eq!(r.macro_avg.f1, 1.0);
        assert_eq!(r.weighted_avg.f1, 1.0);
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn render_layout() {
        let r = binary_report(&[1, 0, 0, 1], &[1, 0, 1, 1]).unwrap();
        let text = r.render_binary();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].contains("Precision") && lines[0].ends_with("Cases"));
        assert!(lines[1].starts_with("Yes"));
        assert!(lines[2].starts_with("No"));
        assert!(lines[3].starts_with("Macro Avg"));
        assert!(lines[4].starts_with("Weighted Avg"));
        assert!(lines[1].contains("0.67") && lines[1].contains("1.00"));
    }
}
