use super::MetricsError;

/// Counts indexed `[predicted][observed]`, both in `labels` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub labels: Vec<u32>,
    pub counts: Vec<Vec<u64>>,
}

/// One-vs-rest counts for a single class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

pub fn confusion(
    y_true: &[u32],
    y_pred: &[u32],
    labels: &[u32],
) -> Result<ConfusionMatrix, MetricsError> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch {
            truth: y_true.len(),
            predicted: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(MetricsError::Empty);
    }
    let k = labels.len();
    let index = |v: u32| {
        labels
            .iter()
            .position(|&l| l == v)
            .ok_or(MetricsError::UnknownLabel(v))
    };
    let mut counts = vec![vec![0u64; k]; k];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        counts[index(p)?][index(t)?] += 1;
    }
    Ok(ConfusionMatrix {
        labels: labels.to_vec(),
        counts,
    })
}

/// Confusion over labels `[0, 1]`.
pub fn confusion_binary(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix, MetricsError> {
    let widen = |v: &[u8]| v.iter().map(|&b| u32::from(b)).collect::<Vec<_>>();
    confusion(&widen(y_true), &widen(y_pred), &[0, 1])
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    fn index(&self, label: u32) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Rows observed as `label`.
    pub fn support(&self, label: u32) -> Option<u64> {
        let j = self.index(label)?;
        Some(self.counts.iter().map(|row| row[j]).sum())
    }

    pub fn one_vs_rest(&self, label: u32) -> Option<BinaryCounts> {
        let c = self.index(label)?;
        let tp = self.counts[c][c];
        let predicted: u64 = self.counts[c].iter().sum();
        let observed: u64 = self.counts.iter().map(|row| row[c]).sum();
        Some(BinaryCounts {
            tp,
            fp: predicted - tp,
            fn_: observed - tp,
            tn: self.total() + tp - predicted - observed,
        })
    }
}

/// `trace / total`.
pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    match cm.total() {
        0 => 0.0,
        total => cm.trace() as f64 / total as f64,
    }
}
