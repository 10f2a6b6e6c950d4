//! k-fold cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::confusion::{accuracy, confusion_binary};
use super::MetricsError;
use crate::dataset::Dataset;
use crate::exec::Execution;
use crate::ml::ModelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CvConfig {
    pub k: usize,
    /// Keep class proportions equal across folds.
    pub stratified: bool,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: 5,
            stratified: true,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub fold_scores: Vec<f64>,
    /// Mean held-out accuracy over the folds.
    pub mean: f64,
}

/// Fold index for every row.
pub fn kfold_assignments(y: &[u8], cfg: &CvConfig) -> Result<Vec<usize>, MetricsError> {
    let n = y.len();
    if cfg.k < 2 || cfg.k > n {
        return Err(MetricsError::InvalidFolds { k: cfg.k, rows: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut folds = vec![0; n];
    if cfg.stratified {
        let mut next = 0;
        for class in [0u8, 1] {
            let mut idx: Vec<usize> = (0..n).filter(|&i| y[i] == class).collect();
            if idx.is_empty() {
                continue;
            }
            if idx.len() < cfg.k {
                return Err(MetricsError::ClassMissingFromFold {
                    class,
                    rows: idx.len(),
                    k: cfg.k,
                });
            }
            idx.shuffle(&mut rng);
            for i in idx {
                folds[i] = next;
                next = (next + 1) % cfg.k;
            }
        }
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        for (pos, i) in idx.into_iter().enumerate() {
            folds[i] = pos % cfg.k;
        }
    }
    Ok(folds)
}

/// Trains on k-1 folds and scores accuracy on the remaining one, for every
/// fold.
pub fn cross_validate(
    spec: &ModelSpec,
    ds: &Dataset,
    cfg: &CvConfig,
) -> Result<CvResult, MetricsError> {
    let folds = kfold_assignments(&ds.y, cfg)?;
    let fold_ids: Vec<usize> = (0..cfg.k).collect();
    let scores = cfg
        .execution
        .map(&fold_ids, |&fold| -> Result<f64, MetricsError> {
            let (held, kept): (Vec<usize>, Vec<usize>) =
                (0..ds.n_rows()).partition(|&i| folds[i] == fold);
            let train = ds.subset(&kept);
            let valid = ds.subset(&held);
            let model = spec.fit(&train)?;
            let pred: Vec<u8> = model
                .predict_batch(valid.x.view(), Execution::Sequential)?
                .iter()
                .map(|p| p.label)
                .collect();
            Ok(accuracy(&confusion_binary(&valid.y, &pred)?))
        });
    let fold_scores = scores.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mean = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
    Ok(CvResult { fold_scores, mean })
}
