//! ID3 classification trees over integer answer codes.

use std::collections::BTreeMap;

use ndarray::ArrayView2;

use super::entropy::{expected_information, information};
use super::{check_xy, FitError};

/// Gains closer than this are treated as equal.
const GAIN_TIE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        label: u8,
        positives: usize,
        samples: usize,
    },
    Split {
        feature: usize,
        gain: f64,
        children: BTreeMap<u32, TreeNode>,
        /// Taken for codes that never reached this node during training.
        fallback: Box<TreeNode>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Id3Config {
    pub max_depth: Option<usize>,
    /// Nodes with fewer rows become leaves.
    pub min_samples: usize,
}

impl Default for Id3Config {
    fn default() -> Self {
        Id3Config {
            max_depth: None,
            min_samples: 2,
        }
    }
}

impl TreeNode {
    fn leaf(positives: usize, samples: usize) -> Self {
        // ties go to class 0
        let label = u8::from(2 * positives > samples);
        TreeNode::Leaf {
            label,
            positives,
            samples,
        }
    }

    /// The leaf `x` lands in.
    pub fn route(&self, x: &[u32]) -> &TreeNode {
        let mut node = self;
        while let TreeNode::Split {
            feature,
            children,
            fallback,
            ..
        } = node
        {
            node = children.get(&x[*feature]).unwrap_or(fallback);
        }
        node
    }

    pub fn predict(&self, x: &[u32]) -> u8 {
        match self.route(x) {
            TreeNode::Leaf { label, .. } => *label,
            TreeNode::Split { .. } => unreachable!("route stops at leaves"),
        }
    }

    /// Fraction of positive training rows in the leaf `x` reaches. This is a
    /// pseudo-probability, not a calibrated estimate.
    pub fn leaf_fraction(&self, x: &[u32]) -> f64 {
        match self.route(x) {
            TreeNode::Leaf {
                positives, samples, ..
            } if *samples > 0 => *positives as f64 / *samples as f64,
            _ => 0.0,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { children, .. } => {
                1 + children.values().map(TreeNode::depth).max().unwrap_or(0)
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { children, .. } => children.values().map(TreeNode::n_leaves).sum(),
        }
    }

    /// Calls `f` on every split node with the features used above it.
    pub fn for_each_split<F: FnMut(&TreeNode, &[usize])>(&self, f: &mut F) {
        fn walk<F: FnMut(&TreeNode, &[usize])>(node: &TreeNode, path: &mut Vec<usize>, f: &mut F) {
            if let TreeNode::Split {
                feature, children, ..
            } = node
            {
                f(node, path);
                path.push(*feature);
                for child in children.values() {
                    walk(child, path, f);
                }
                path.pop();
            }
        }
        walk(self, &mut Vec::new(), f);
    }

    /// Largest feature index referenced, if any.
    pub fn max_feature(&self) -> Option<usize> {
        let mut max = None;
        self.for_each_split(&mut |node, _| {
            if let TreeNode::Split { feature, .. } = node {
                max = max.max(Some(*feature));
            }
        });
        max
    }
}

pub fn fit_decision_tree(
    x: ArrayView2<u32>,
    y: &[u8],
    cfg: &Id3Config,
) -> Result<TreeNode, FitError> {
    check_xy(x.nrows(), y.len())?;
    let rows: Vec<usize> = (0..x.nrows()).collect();
    let features: Vec<usize> = (0..x.ncols()).collect();
    fit_decision_tree_on(x, y, &rows, &features, cfg)
}

/// Grows a tree from the listed rows (repeats allowed) using only the listed
/// features. Feature indices in the result refer to columns of `x`.
pub fn fit_decision_tree_on(
    x: ArrayView2<u32>,
    y: &[u8],
    rows: &[usize],
    features: &[usize],
    cfg: &Id3Config,
) -> Result<TreeNode, FitError> {
    check_xy(x.nrows(), y.len())?;
    if rows.is_empty() {
        return Err(FitError::EmptyTrainingSet);
    }
    if let Some(&bad) = y.iter().find(|&&v| v > 1) {
        return Err(FitError::NonBinaryLabel(f64::from(bad)));
    }
    let mut features = features.to_vec();
    features.sort_unstable();
    features.dedup();
    let max_code: Vec<usize> = (0..x.ncols())
        .map(|j| x.column(j).iter().copied().max().unwrap_or(0) as usize)
        .collect();
    let builder = Builder {
        x,
        y,
        cfg,
        max_code,
    };
    Ok(builder.grow(rows.to_vec(), &features, 0))
}

struct Builder<'a> {
    x: ArrayView2<'a, u32>,
    y: &'a [u8],
    cfg: &'a Id3Config,
    max_code: Vec<usize>,
}

impl Builder<'_> {
    fn grow(&self, rows: Vec<usize>, available: &[usize], depth: usize) -> TreeNode {
        let positives = rows.iter().filter(|&&r| self.y[r] == 1).count();
        let samples = rows.len();
        let pure = positives == 0 || positives == samples;
        let capped = self.cfg.max_depth.is_some_and(|d| depth >= d);
        if pure || capped || available.is_empty() || samples < self.cfg.min_samples {
            return TreeNode::leaf(positives, samples);
        }

        let node_info = information(positives, samples - positives);
        let mut best: Option<(usize, f64)> = None;
        let mut counts: Vec<(usize, usize)> = Vec::new();
        for &f in available {
            counts.clear();
            counts.resize(self.max_code[f] + 1, (0, 0));
            for &r in &rows {
                let cell = &mut counts[self.x[[r, f]] as usize];
                if self.y[r] == 1 {
                    cell.0 += 1;
                } else {
                    cell.1 += 1;
                }
            }
            let cells: Vec<(usize, usize)> =
                counts.iter().copied().filter(|(p, n)| p + n > 0).collect();
            if cells.len() < 2 {
                continue;
            }
            let g = node_info - expected_information(&cells);
            if best.is_none_or(|(_, bg)| g > bg + GAIN_TIE) {
                best = Some((f, g));
            }
        }
        let Some((feature, gain)) = best else {
            return TreeNode::leaf(positives, samples);
        };

        let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for &r in &rows {
            groups.entry(self.x[[r, feature]]).or_default().push(r);
        }
        let rest: Vec<usize> = available
            .iter()
            .copied()
            .filter(|&f| f != feature)
            .collect();
        let children = groups
            .into_iter()
            .map(|(code, sub)| (code, self.grow(sub, &rest, depth + 1)))
            .collect();
        TreeNode::Split {
            feature,
            gain,
            children,
            fallback: Box::new(TreeNode::leaf(positives, samples)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn constant_labels_make_one_leaf() {
        let x = array![[1, 2], [2, 1], [3, 3]];
        let t = fit_decision_tree(x.view(), &[1, 1, 1], &Id3Config::default()).unwrap();
        assert_eq!(
            t,
            TreeNode::Leaf {
                label: 1,
                positives: 3,
                samples: 3
            }
        );
    }

    #[test]
    fn xor_needs_two_levels() {
        let x = array![[1, 1], [1, 2], [2, 1], [2, 2]];
        let y = [0, 1, 1, 0];
        let t = fit_decision_tree(x.view(), &y, &Id3Config::default()).unwrap();
        assert_eq!(t.depth(), 2);
        for (row, label) in x.rows().into_iter().zip(y) {
            assert_eq!(t.predict(row.as_slice().unwrap()), label);
        }
        // neither feature helps alone, so the root split ties and takes feature 0
        assert!(matches!(t, TreeNode::Split { feature: 0, .. }));
    }

    #[test]
    fn unseen_code_uses_fallback() {
        let x = array![[1], [1], [1], [2]];
        let t = fit_decision_tree(x.view(), &[1, 1, 0, 0], &Id3Config::default()).unwrap();
        // root holds 2 yes / 2 no, so its majority leaf breaks the tie towards 0
        assert_eq!(t.predict(&[7]), 0);
        assert_eq!(t.leaf_fraction(&[7]), 0.5);
        assert_eq!(t.predict(&[2]), 0);
    }

    #[test]
    fn depth_cap_and_min_samples() {
        let x = array![[1, 1], [1, 2], [2, 1], [2, 2]];
        let y = [0, 1, 1, 0];
        let stump = fit_decision_tree(
            x.view(),
            &y,
            &Id3Config {
                max_depth: Some(1),
                min_samples: 2,
            },
        )
        .unwrap();
        assert_eq!(stump.depth(), 1);
        let root_only = fit_decision_tree(
            x.view(),
            &y,
            &Id3Config {
                max_depth: None,
                min_samples: 5,
            },
        )
        .unwrap();
        assert_eq!(root_only.depth(), 0);
    }

    #[test]
    fn conflicting_rows_stop_when_features_run_out() {
        let x = array![[1], [1], [1]];
        let t = fit_decision_tree(x.view(), &[1, 0, 1], &Id3Config::default()).unwrap();
        assert_eq!(
            t,
            TreeNode::Leaf {
                label: 1,
                positives: 2,
                samples: 3
            }
        );
    }

    #[test]
    fn restricted_features_are_respected() {
        let x = array![[1, 5], [1, 6], [2, 5], [2, 6]];
        let t = fit_decision_tree_on(
            x.view(),
            &[0, 1, 0, 1],
            &[0, 1, 2, 3],
            &[1],
            &Id3Config::default(),
        )
        .unwrap();
        assert!(matches!(t, TreeNode::Split { feature: 1, .. }));
        assert!(
            fit_decision_tree_on(x.view(), &[0, 1, 0, 1], &[], &[0], &Id3Config::default())
                .is_err()
        );
    }
}
