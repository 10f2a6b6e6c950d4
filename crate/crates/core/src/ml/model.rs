//! One fit/predict interface over every learner.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView2;

use super::forest::{default_features_per_tree, fit_random_forest, ForestConfig, ForestModel};
use super::gbm::{fit_gbm, GbmConfig, GbmModel};
use super::gd::GdConfig;
use super::id3::{fit_decision_tree, Id3Config, TreeNode};
use super::linear::fit_linear_regression;
use super::logistic::{fit_logistic, sigmoid};
use super::naive_bayes::{fit_gaussian_nb, GaussianNbModel};
use super::weights::{Scaler, WeightVector};
use super::{FitError, PredictError};
use crate::dataset::Dataset;
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Linear,
    Logistic,
    NaiveBayes,
    DecisionTree,
    RandomForest,
    GradientBoosting,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Linear,
        ModelKind::Logistic,
        ModelKind::NaiveBayes,
        ModelKind::DecisionTree,
        ModelKind::RandomForest,
        ModelKind::GradientBoosting,
    ];

    /// The five compared classifiers, in comparison-table column order.
    pub const COMPARED: [ModelKind; 5] = [
        ModelKind::DecisionTree,
        ModelKind::NaiveBayes,
        ModelKind::Logistic,
        ModelKind::RandomForest,
        ModelKind::GradientBoosting,
    ];

    /// Short tag used on the command line and in model files.
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Logistic => "logistic",
            ModelKind::NaiveBayes => "nb",
            ModelKind::DecisionTree => "tree",
            ModelKind::RandomForest => "forest",
            ModelKind::GradientBoosting => "gb",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Linear => "Linear Regression",
            ModelKind::Logistic => "Logistic Regression",
            ModelKind::NaiveBayes => "Gaussian NB",
            ModelKind::DecisionTree => "Decision Tree",
            ModelKind::RandomForest => "Random Forest",
            ModelKind::GradientBoosting => "Gradient Boosting",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                format!("unknown model `{s}` (expected linear, logistic, nb, tree, forest or gb)")
            })
    }
}

/// Hyperparameters for one learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearnerConfig {
    Linear(GdConfig),
    Logistic(GdConfig),
    NaiveBayes,
    DecisionTree(Id3Config),
    RandomForest(ForestConfig),
    GradientBoosting(GbmConfig),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub learner: LearnerConfig,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        let learner = match kind {
            ModelKind::Linear => LearnerConfig::Linear(GdConfig::default()),
            ModelKind::Logistic => LearnerConfig::Logistic(GdConfig::default()),
            ModelKind::NaiveBayes => LearnerConfig::NaiveBayes,
            ModelKind::DecisionTree => LearnerConfig::DecisionTree(Id3Config::default()),
            ModelKind::RandomForest => LearnerConfig::RandomForest(ForestConfig::default()),
            ModelKind::GradientBoosting => LearnerConfig::GradientBoosting(GbmConfig::default()),
        };
        ModelSpec { learner, seed: 0 }
    }

    /// Default specs for the five compared classifiers.
    pub fn paper_five() -> Vec<ModelSpec> {
        ModelKind::COMPARED
            .into_iter()
            .map(ModelSpec::new)
            .collect()
    }

    pub fn kind(&self) -> ModelKind {
        match self.learner {
            LearnerConfig::Linear(_) => ModelKind::Linear,
            LearnerConfig::Logistic(_) => ModelKind::Logistic,
            LearnerConfig::NaiveBayes => ModelKind::NaiveBayes,
            LearnerConfig::DecisionTree(_) => ModelKind::DecisionTree,
            LearnerConfig::RandomForest(_) => ModelKind::RandomForest,
            LearnerConfig::GradientBoosting(_) => ModelKind::GradientBoosting,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        match &mut self.learner {
            LearnerConfig::Linear(c) | LearnerConfig::Logistic(c) => c.execution = exec,
            LearnerConfig::RandomForest(c) => c.execution = exec,
            LearnerConfig::GradientBoosting(c) => c.execution = exec,
            LearnerConfig::NaiveBayes | LearnerConfig::DecisionTree(_) => {}
        }
        self
    }

    /// Resolved hyperparameters for a dataset with `n_features` columns, as
    /// printable key/value pairs. Execution mode is left out because it never
    /// changes the fitted model.
    pub fn hyperparameters(&self, n_features: usize) -> BTreeMap<String, String> {
        let mut h = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            h.insert(k.to_string(), v);
        };
        let depth = |d: Option<usize>| d.map_or_else(|| "none".to_string(), |d| d.to_string());
        match &self.learner {
            LearnerConfig::Linear(c) | LearnerConfig::Logistic(c) => {
                put("learning_rate", c.learning_rate.to_string());
                put("tolerance", c.tolerance.to_string());
                put("max_iters", c.max_iters.to_string());
                put("l2", c.l2.to_string());
                if self.kind() == ModelKind::Logistic {
                    put("weight_cap", c.weight_cap.to_string());
                }
                put("standardize", "true".into());
            }
            LearnerConfig::NaiveBayes => {
                put(
                    "variance_floor_ratio",
                    super::naive_bayes::VARIANCE_FLOOR_RATIO.to_string(),
                );
            }
            LearnerConfig::DecisionTree(c) => {
                put("max_depth", depth(c.max_depth));
                put("min_samples", c.min_samples.to_string());
            }
            LearnerConfig::RandomForest(c) => {
                put("n_trees", c.n_trees.to_string());
                let m = c
                    .features_per_tree
                    .unwrap_or_else(|| default_features_per_tree(n_features));
                put("features_per_tree", m.to_string());
                put("bootstrap", c.bootstrap.to_string());
                put("max_depth", depth(c.tree.max_depth));
                put("min_samples", c.tree.min_samples.to_string());
            }
            LearnerConfig::GradientBoosting(c) => {
                put("n_stages", c.n_stages.to_string());
                put("learning_rate", c.learning_rate.to_string());
                put("max_depth", c.max_depth.to_string());
                put("min_samples", c.min_samples.to_string());
            }
        }
        h
    }

    pub fn fit(&self, ds: &Dataset) -> Result<ClassifierModel, FitError> {
        if ds.n_rows() == 0 {
            return Err(FitError::EmptyTrainingSet);
        }
        let mut training = BTreeMap::new();
        let params = match self.learner {
            LearnerConfig::Linear(cfg) | LearnerConfig::Logistic(cfg) => {
                let scaler = Scaler::fit(ds.x_real().view());
                let z = scaler.transform(ds.x_real().view());
                let y = ds.y_real();
                let logistic = self.kind() == ModelKind::Logistic;
                let report = if logistic {
                    fit_logistic(z.view(), &y, &cfg)?
                } else {
                    fit_linear_regression(z.view(), &y, &cfg)?
                };
                training.insert("iterations".into(), report.iterations.to_string());
                training.insert("converged".into(), report.converged.to_string());
                training.insert("final_loss".into(), report.final_loss.to_string());
                if logistic {
                    training.insert("separated".into(), report.separated.to_string());
                    ModelParams::Logistic {
                        weights: report.weights,
                        scaler,
                    }
                } else {
                    ModelParams::LinearThreshold {
                        weights: report.weights,
                        scaler,
                    }
                }
            }
            LearnerConfig::NaiveBayes => {
                let y: Vec<u32> = ds.y.iter().map(|&v| u32::from(v)).collect();
                ModelParams::GaussianNb(fit_gaussian_nb(ds.x_real().view(), &y)?)
            }
            LearnerConfig::DecisionTree(cfg) => {
                ModelParams::DecisionTree(fit_decision_tree(ds.x.view(), &ds.y, &cfg)?)
            }
            LearnerConfig::RandomForest(cfg) => {
                let cfg = ForestConfig {
                    seed: self.seed,
                    ..cfg
                };
                ModelParams::RandomForest(fit_random_forest(ds.x.view(), &ds.y, &cfg)?)
            }
            LearnerConfig::GradientBoosting(cfg) => {
                let cfg = GbmConfig {
                    seed: self.seed,
                    ..cfg
                };
                let model = fit_gbm(ds.x.view(), &ds.y, &cfg)?;
                if let Some(last) = model.train_loss.last() {
                    training.insert("final_loss".into(), last.to_string());
                }
                ModelParams::GradientBoosting(model)
            }
        };
        Ok(ClassifierModel {
            params,
            meta: ModelMeta {
                feature_names: ds.feature_names.clone(),
                domains: ds.domains.clone(),
                hyperparameters: self.hyperparameters(ds.n_features()),
                training,
                seed: self.seed,
                catalog_version: String::new(),
                created: 0,
            },
        })
    }
}

/// Learned parameters of each model family.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    /// Linear regression on 0/1 targets; `a(x) > 0.5` means yes.
    LinearThreshold {
        weights: WeightVector,
        scaler: Scaler,
    },
    Logistic {
        weights: WeightVector,
        scaler: Scaler,
    },
    GaussianNb(GaussianNbModel),
    DecisionTree(TreeNode),
    RandomForest(ForestModel),
    GradientBoosting(GbmModel),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::LinearThreshold { .. } => ModelKind::Linear,
            ModelParams::Logistic { .. } => ModelKind::Logistic,
            ModelParams::GaussianNb(_) => ModelKind::NaiveBayes,
            ModelParams::DecisionTree(_) => ModelKind::DecisionTree,
            ModelParams::RandomForest(_) => ModelKind::RandomForest,
            ModelParams::GradientBoosting(_) => ModelKind::GradientBoosting,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelMeta {
    pub feature_names: Vec<String>,
    /// Allowed non-zero codes per feature, when known.
    pub domains: Option<Vec<Vec<u32>>>,
    pub hyperparameters: BTreeMap<String, String>,
    /// Facts about the training run (iterations, final loss, ...).
    pub training: BTreeMap<String, String>,
    pub seed: u64,
    pub catalog_version: String,
    /// Seconds since the Unix epoch.
    pub created: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionResult {
    pub probability_yes: f64,
    pub label: u8,
}

impl PredictionResult {
    /// Label is 1 only when the probability is strictly above one half.
    pub fn from_probability(p: f64) -> Self {
        PredictionResult {
            probability_yes: p,
            label: u8::from(p > 0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    pub params: ModelParams,
    pub meta: ModelMeta,
}

fn scaled(scaler: &Scaler, x: &[u32]) -> Vec<f64> {
    let mut v: Vec<f64> = x.iter().map(|&c| f64::from(c)).collect();
    scaler.transform_row(&mut v);
    v
}

impl ClassifierModel {
    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }

    pub fn n_features(&self) -> usize {
        self.meta.feature_names.len()
    }

    /// Checks that the learned parameters agree with the declared arity.
    pub fn check_structure(&self) -> Result<(), String> {
        let d = self.n_features();
        let in_range = |max: Option<usize>, what: &str| match max {
            Some(f) if f >= d => Err(format!(
                "{what} references feature {f} but the model has {d}"
            )),
            _ => Ok(()),
        };
        if let Some(domains) = &self.meta.domains {
            if domains.len() != d {
                return Err(format!("{} domains for {d} features", domains.len()));
            }
        }
        match &self.params {
            ModelParams::LinearThreshold { weights, scaler }
            | ModelParams::Logistic { weights, scaler } => {
                if weights.0.len() != d + 1 {
                    return Err(format!("{} weights for {d} features", weights.0.len()));
                }
                if scaler.mean.len() != d || scaler.scale.len() != d {
                    return Err(format!(
                        "scaler sized {} for {d} features",
                        scaler.mean.len()
                    ));
                }
                if scaler.scale.iter().any(|s| *s == 0.0) {
                    return Err("scaler has a zero scale".into());
                }
                Ok(())
            }
            ModelParams::GaussianNb(nb) => {
                let k = nb.classes.len();
                if k == 0 || nb.priors.len() != k || nb.means.len() != k || nb.variances.len() != k
                {
                    return Err("naive Bayes tables disagree on the class count".into());
                }
                if nb
                    .means
                    .iter()
                    .chain(&nb.variances)
                    .any(|row| row.len() != d)
                {
                    return Err(format!("naive Bayes tables are not sized for {d} features"));
                }
                if nb.variances.iter().flatten().any(|v| !(*v > 0.0)) {
                    return Err("naive Bayes variance must be positive".into());
                }
                Ok(())
            }
            ModelParams::DecisionTree(t) => in_range(t.max_feature(), "tree"),
            ModelParams::RandomForest(f) => {
                if f.trees.is_empty() {
                    return Err("forest has no trees".into());
                }
                for (i, t) in f.trees.iter().enumerate() {
                    in_range(t.root.max_feature(), &format!("forest tree {i}"))?;
                    in_range(
                        t.features.iter().copied().max(),
                        &format!("forest tree {i} feature list"),
                    )?;
                }
                Ok(())
            }
            ModelParams::GradientBoosting(g) => {
                if g.stages
                    .iter()
                    .any(|s| !(s.shrinkage > 0.0 && s.shrinkage <= 1.0))
                {
                    return Err("boosting shrinkage outside (0, 1]".into());
                }
                in_range(g.max_feature(), "boosting stage")
            }
        }
    }

    /// Validates arity and codes without running the model.
    pub fn check_input(&self, x: &[u32]) -> Result<(), PredictError> {
        if x.len() != self.n_features() {
            return Err(PredictError::Arity {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        if let Some(domains) = &self.meta.domains {
            for (j, (&code, allowed)) in x.iter().zip(domains).enumerate() {
                if code != 0 && !allowed.contains(&code) {
                    return Err(PredictError::OutOfDomain {
                        feature: self.meta.feature_names[j].clone(),
                        code,
                    });
                }
            }
        }
        Ok(())
    }

    /// Probability of the yes class for an already validated input. Tree
    /// models report the leaf's positive fraction, forests the share of yes
    /// votes and the linear model its clamped output; none of these are
    /// calibrated probabilities.
    pub fn probability(&self, x: &[u32]) -> f64 {
        match &self.params {
            ModelParams::LinearThreshold { weights, scaler } => {
                weights.decision(&scaled(scaler, x)).clamp(0.0, 1.0)
            }
            ModelParams::Logistic { weights, scaler } => {
                sigmoid(weights.decision(&scaled(scaler, x)))
            }
            ModelParams::GaussianNb(nb) => {
                let v: Vec<f64> = x.iter().map(|&c| f64::from(c)).collect();
                nb.proba_of(1, &v)
            }
            ModelParams::DecisionTree(t) => t.leaf_fraction(x),
            ModelParams::RandomForest(f) => f.vote_fraction(x),
            ModelParams::GradientBoosting(g) => super::gbm::predict_proba_gbm(g, x),
        }
    }

    pub fn predict(&self, x: &[u32]) -> Result<PredictionResult, PredictError> {
        self.check_input(x)?;
        Ok(PredictionResult::from_probability(self.probability(x)))
    }

    /// Predicts every row, failing on the first invalid one before any
    /// model evaluation.
    pub fn predict_batch(
        &self,
        x: ArrayView2<u32>,
        exec: Execution,
    ) -> Result<Vec<PredictionResult>, PredictError> {
        let x = x.as_standard_layout();
        let rows: Vec<&[u32]> = x
            .rows()
            .into_iter()
            .map(|r| r.to_slice().expect("standard layout"))
            .collect();
        for r in &rows {
            self.check_input(r)?;
        }
        Ok(exec.map(&rows, |r| {
            PredictionResult::from_probability(self.probability(r))
        }))
    }
}
