//! Bagged ID3 trees with a per-tree random feature subset.

use ndarray::ArrayView2;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::id3::{fit_decision_tree_on, Id3Config, TreeNode};
use super::{check_xy, FitError};
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features drawn per tree; `None` means `ceil(sqrt(d))`.
    pub features_per_tree: Option<usize>,
    pub bootstrap: bool,
    pub tree: Id3Config,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            features_per_tree: None,
            bootstrap: true,
            tree: Id3Config::default(),
            seed: 0,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestTree {
    pub seed: u64,
    /// Sorted columns this tree was allowed to split on.
    pub features: Vec<usize>,
    pub root: TreeNode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<ForestTree>,
    pub features_per_tree: usize,
}

pub fn default_features_per_tree(d: usize) -> usize {
    (d as f64).sqrt().ceil() as usize
}

pub fn fit_random_forest(
    x: ArrayView2<u32>,
    y: &[u8],
    cfg: &ForestConfig,
) -> Result<ForestModel, FitError> {
    check_xy(x.nrows(), y.len())?;
    if cfg.n_trees == 0 {
        return Err(FitError::InvalidConfig(
            "a forest needs at least one tree".into(),
        ));
    }
    let d = x.ncols();
    let m = cfg
        .features_per_tree
        .unwrap_or_else(|| default_features_per_tree(d));
    if m > d {
        return Err(FitError::InvalidConfig(format!(
            "{m} features per tree requested but only {d} exist"
        )));
    }
    if m == 0 && d > 0 {
        return Err(FitError::InvalidConfig(
            "features per tree must be at least 1".into(),
        ));
    }

    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds: Vec<u64> = (0..cfg.n_trees).map(|_| master.next_u64()).collect();
    let n = x.nrows();
    let trees = cfg.execution.map(&seeds, |&seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut features = rand::seq::index::sample(&mut rng, d, m).into_vec();
        features.sort_unstable();
        let rows: Vec<usize> = if cfg.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        fit_decision_tree_on(x, y, &rows, &features, &cfg.tree).map(|root| ForestTree {
            seed,
            features,
            root,
        })
    });
    Ok(ForestModel {
        trees: trees.into_iter().collect::<Result<_, _>>()?,
        features_per_tree: m,
    })
}

impl ForestModel {
    /// `(yes votes, total votes)`.
    pub fn votes(&self, x: &[u32]) -> (usize, usize) {
        let yes = self.trees.iter().filter(|t| t.root.predict(x) == 1).count();
        (yes, self.trees.len())
    }

    /// Share of trees voting yes.
    pub fn vote_fraction(&self, x: &[u32]) -> f64 {
        let (yes, total) = self.votes(x);
        yes as f64 / total as f64
    }
}

/// Most frequent label among the trees' votes.
pub fn predict_forest(model: &ForestModel, x: &[u32]) -> u8 {
    let votes: Vec<u32> = model
        .trees
        .iter()
        .map(|t| u32::from(t.root.predict(x)))
        .collect();
    majority_vote(&votes).map_or(0, |v| v as u8)
}

/// Mode of `votes`, with ties going to the smallest label. `None` if empty.
pub fn majority_vote(votes: &[u32]) -> Option<u32> {
    let mut counts = std::collections::BTreeMap::new();
    for &v in votes {
        *counts.entry(v).or_insert(0usize) += 1;
    }
    let mut best: Option<(u32, usize)> = None;
    for (label, count) in counts {
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((label, count));
        }
    }
    best.map(|(label, _)| label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::id3::fit_decision_tree;
    use ndarray::array;

    #[test]
    fn mode_examples() {
        assert_eq!(majority_vote(&[1, 1, 0]), Some(1));
        assert_eq!(majority_vote(&[1, 0]), Some(0));
        assert_eq!(majority_vote(&[2, 2, 1, 1, 3]), Some(1));
        assert_eq!(majority_vote(&[]), None);
    }

    #[test]
    fn single_full_tree_matches_id3() {
        let x = array![[1, 1, 3], [1, 2, 3], [2, 1, 1], [2, 2, 1], [3, 1, 2]];
        let y = [0, 1, 1, 0, 1];
        let cfg = ForestConfig {
            n_trees: 1,
            features_per_tree: Some(3),
            bootstrap: false,
            ..Default::default()
        };
        let forest = fit_random_forest(x.view(), &y, &cfg).unwrap();
        let tree = fit_decision_tree(x.view(), &y, &Id3Config::default()).unwrap();
        assert_eq!(forest.trees[0].root, tree);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    assert_eq!(
                        predict_forest(&forest, &[a, b, c]),
                        tree.predict(&[a, b, c])
                    );
                }
            }
        }
    }

    #[test]
    fn seeds_are_reproducible_across_execution_modes() {
        let x = ndarray::Array2::from_shape_fn((60, 6), |(i, j)| ((i * 7 + j * 3) % 4) as u32 + 1);
        let y: Vec<u8> = (0..60).map(|i| u8::from(i % 3 == 0)).collect();
        let seq = ForestConfig {
            n_trees: 12,
            seed: 9,
            execution: Execution::Sequential,
            ..Default::default()
        };
        let par = ForestConfig {
            execution: Execution::Parallel,
            ..seq
        };
        let a = fit_random_forest(x.view(), &y, &seq).unwrap();
        let b = fit_random_forest(x.view(), &y, &par).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.features_per_tree, 3);
        let c = fit_random_forest(x.view(), &y, &ForestConfig { seed: 10, ..seq }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_configs() {
        let x = array![[1, 2]];
        let too_many = ForestConfig {
            features_per_tree: Some(3),
            ..Default::default()
        };
        assert!(fit_random_forest(x.view(), &[1], &too_many).is_err());
        let none = ForestConfig {
            n_trees: 0,
            ..Default::default()
        };
        assert!(fit_random_forest(x.view(), &[1], &none).is_err());
    }
}
