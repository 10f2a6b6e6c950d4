//! Gradient boosting for a binary target: log-loss, Newton leaf steps.

use ndarray::ArrayView2;

use super::logistic::sigmoid;
use super::regression_tree::{fit_regression_tree, RegressionNode, RegressionTreeConfig};
use super::{check_xy, FitError};
use crate::exec::{Execution, CHUNK_ROWS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmConfig {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples: usize,
    /// Recorded for reproducibility; fitting itself draws no random numbers.
    pub seed: u64,
    pub execution: Execution,
}

impl Default for GbmConfig {
    fn default() -> Self {
        GbmConfig {
            n_stages: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples: 10,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbmStage {
    pub tree: RegressionNode,
    pub shrinkage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbmModel {
    /// Log-odds of the training prevalence.
    pub init_score: f64,
    pub stages: Vec<GbmStage>,
    /// Mean training log-loss before any stage, then after each stage.
    pub train_loss: Vec<f64>,
}

fn mean_log_loss(scores: &[f64], y: &[u8], exec: Execution) -> f64 {
    let parts = exec.map_chunks(scores.len(), CHUNK_ROWS, |range| {
        range
            .map(|i| {
                let z = scores[i];
                let softplus = if z > 0.0 {
                    z + (-z).exp().ln_1p()
                } else {
                    z.exp().ln_1p()
                };
                softplus - f64::from(y[i]) * z
            })
            .sum::<f64>()
    });
    parts.into_iter().sum::<f64>() / scores.len() as f64
}

pub fn fit_gbm(x: ArrayView2<u32>, y: &[u8], cfg: &GbmConfig) -> Result<GbmModel, FitError> {
    check_xy(x.nrows(), y.len())?;
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0) {
        return Err(FitError::InvalidConfig(format!(
            "shrinkage {} must lie in (0, 1]",
            cfg.learning_rate
        )));
    }
    if let Some(&bad) = y.iter().find(|&&v| v > 1) {
        return Err(FitError::NonBinaryLabel(f64::from(bad)));
    }
    let x = x.as_standard_layout();
    let x = x.view();
    let n = y.len();
    let positives = y.iter().filter(|&&v| v == 1).count();
    if positives == 0 || positives == n {
        return Err(FitError::SingleClass);
    }
    let prevalence = positives as f64 / n as f64;
    let init_score = (prevalence / (1.0 - prevalence)).ln();

    let tree_cfg = RegressionTreeConfig {
        max_depth: cfg.max_depth,
        min_samples: cfg.min_samples,
    };
    let mut scores = vec![init_score; n];
    let mut residual = vec![0.0; n];
    let mut hessian = vec![0.0; n];
    let mut train_loss = vec![mean_log_loss(&scores, y, cfg.execution)];
    let mut stages = Vec::with_capacity(cfg.n_stages);
    for _ in 0..cfg.n_stages {
        for i in 0..n {
            let p = sigmoid(scores[i]);
            residual[i] = f64::from(y[i]) - p;
            hessian[i] = p * (1.0 - p);
        }
        let tree = fit_regression_tree(x, &residual, &hessian, &tree_cfg, cfg.execution);
        for (i, s) in scores.iter_mut().enumerate() {
            *s += cfg.learning_rate * tree.predict(x.row(i).as_slice().expect("standard layout"));
        }
        train_loss.push(mean_log_loss(&scores, y, cfg.execution));
        stages.push(GbmStage {
            tree,
            shrinkage: cfg.learning_rate,
        });
    }
    Ok(GbmModel {
        init_score,
        stages,
        train_loss,
    })
}

impl GbmModel {
    pub fn raw_score(&self, x: &[u32]) -> f64 {
        self.init_score
            + self
                .stages
                .iter()
                .map(|s| s.shrinkage * s.tree.predict(x))
                .sum::<f64>()
    }

    pub fn max_feature(&self) -> Option<usize> {
        self.stages
            .iter()
            .filter_map(|s| s.tree.max_feature())
            .max()
    }
}

pub fn predict_proba_gbm(model: &GbmModel, x: &[u32]) -> f64 {
    sigmoid(model.raw_score(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn zero_stages_on_balanced_data() {
        let x = array![[1], [2], [1], [2]];
        let cfg = GbmConfig {
            n_stages: 0,
            ..Default::default()
        };
        let m = fit_gbm(x.view(), &[0, 0, 1, 1], &cfg).unwrap();
        assert_eq!(m.init_score, 0.0);
        assert_eq!(predict_proba_gbm(&m, &[0]), 0.5);
        assert_eq!(m.train_loss.len(), 1);
    }

    #[test]
    fn single_class_is_rejected() {
        let x = array![[1], [2]];
        assert!(matches!(
            fit_gbm(x.view(), &[1, 1], &GbmConfig::default()),
            Err(FitError::SingleClass)
        ));
    }

    #[test]
    fn learns_a_threshold() {
        let x = Array2::from_shape_fn((200, 2), |(i, j)| {
            if j == 0 {
                (i % 5) as u32 + 1
            } else {
                (i % 3) as u32
            }
        });
        let y: Vec<u8> = (0..200).map(|i| u8::from(i % 5 >= 3)).collect();
        let cfg = GbmConfig {
            n_stages: 30,
            min_samples: 2,
            ..Default::default()
        };
        let m = fit_gbm(x.view(), &y, &cfg).unwrap();
        let correct = (0..200)
            .filter(|&i| (predict_proba_gbm(&m, x.row(i).as_slice().unwrap()) > 0.5) == (y[i] == 1))
            .count();
        assert_eq!(correct, 200);
        assert!(m.train_loss.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }

    #[test]
    fn shrinkage_must_be_in_range() {
        let x = array![[1], [2]];
        for bad in [0.0, 1.5, f64::NAN] {
            let cfg = GbmConfig {
                learning_rate: bad,
                ..Default::default()
            };
            assert!(fit_gbm(x.view(), &[0, 1], &cfg).is_err());
        }
    }
}
