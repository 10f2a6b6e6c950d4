//! Depth-capped regression trees used as boosting stages. Each split sends
//! codes `<= threshold` left, so codes unseen in training still have a path.

use ndarray::ArrayView2;

use crate::exec::Execution;

/// Denominator floor for Newton leaf steps.
pub const HESSIAN_FLOOR: f64 = 1e-12;
const MIN_REDUCTION: f64 = 1e-12;
/// Nodes smaller than this search features sequentially even in parallel mode.
const PARALLEL_MIN_ROWS: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum RegressionNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: u32,
        left: Box<RegressionNode>,
        right: Box<RegressionNode>,
    },
}

impl RegressionNode {
    pub fn predict(&self, x: &[u32]) -> f64 {
        let mut node = self;
        loop {
            match node {
                RegressionNode::Leaf { value } => return *value,
                RegressionNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            RegressionNode::Leaf { .. } => 0,
            RegressionNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn max_feature(&self) -> Option<usize> {
        match self {
            RegressionNode::Leaf { .. } => None,
            RegressionNode::Split {
                feature,
                left,
                right,
                ..
            } => Some(*feature)
                .max(left.max_feature())
                .max(right.max_feature()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegressionTreeConfig {
    pub max_depth: usize,
    pub min_samples: usize,
}

/// Grows a tree on `target`, choosing splits that most reduce the squared
/// error. Leaves hold `sum(target) / max(sum(hessian), floor)`.
pub fn fit_regression_tree(
    x: ArrayView2<u32>,
    target: &[f64],
    hessian: &[f64],
    cfg: &RegressionTreeConfig,
    exec: Execution,
) -> RegressionNode {
    let max_code: Vec<usize> = (0..x.ncols())
        .map(|j| x.column(j).iter().copied().max().unwrap_or(0) as usize)
        .collect();
    let grower = Grower {
        x,
        target,
        hessian,
        cfg,
        exec,
        max_code,
    };
    grower.grow((0..x.nrows()).collect(), 0)
}

struct Grower<'a> {
    x: ArrayView2<'a, u32>,
    target: &'a [f64],
    hessian: &'a [f64],
    cfg: &'a RegressionTreeConfig,
    exec: Execution,
    max_code: Vec<usize>,
}

#[derive(Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: u32,
    reduction: f64,
}

impl Grower<'_> {
    fn leaf(&self, rows: &[usize]) -> RegressionNode {
        let num: f64 = rows.iter().map(|&r| self.target[r]).sum();
        let den: f64 = rows.iter().map(|&r| self.hessian[r]).sum();
        RegressionNode::Leaf {
            value: num / den.max(HESSIAN_FLOOR),
        }
    }

    fn grow(&self, rows: Vec<usize>, depth: usize) -> RegressionNode {
        if depth >= self.cfg.max_depth || rows.len() < self.cfg.min_samples.max(2) {
            return self.leaf(&rows);
        }
        let features: Vec<usize> = (0..self.x.ncols()).collect();
        let exec = if rows.len() >= PARALLEL_MIN_ROWS {
            self.exec
        } else {
            Execution::Sequential
        };
        let candidates = exec.map(&features, |&f| self.best_threshold(&rows, f));
        let mut best: Option<Candidate> = None;
        for c in candidates.into_iter().flatten() {
            if best.is_none_or(|b| c.reduction > b.reduction + MIN_REDUCTION) {
                best = Some(c);
            }
        }
        let Some(best) = best.filter(|b| b.reduction > MIN_REDUCTION) else {
            return self.leaf(&rows);
        };
        let (left, right): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.x[[r, best.feature]] <= best.threshold);
        RegressionNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(self.grow(left, depth + 1)),
            right: Box::new(self.grow(right, depth + 1)),
        }
    }

    fn best_threshold(&self, rows: &[usize], feature: usize) -> Option<Candidate> {
        let mut sum = vec![0.0; self.max_code[feature] + 1];
        let mut count = vec![0usize; self.max_code[feature] + 1];
        for &r in rows {
            let c = self.x[[r, feature]] as usize;
            sum[c] += self.target[r];
            count[c] += 1;
        }
        let total_sum: f64 = sum.iter().sum();
        let n = rows.len();
        let base = total_sum * total_sum / n as f64;
        let (mut left_sum, mut left_n) = (0.0, 0usize);
        let mut best: Option<Candidate> = None;
        for code in 0..sum.len() {
            if count[code] == 0 {
                continue;
            }
            left_sum += sum[code];
            left_n += count[code];
            if left_n == n {
                break;
            }
            let right_sum = total_sum - left_sum;
            let right_n = n - left_n;
            let reduction =
                left_sum * left_sum / left_n as f64 + right_sum * right_sum / right_n as f64 - base;
            if best.is_none_or(|b| reduction > b.reduction + MIN_REDUCTION) {
                best = Some(Candidate {
                    feature,
                    threshold: code as u32,
                    reduction,
                });
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn stump_finds_the_step() {
        let x = array![[1], [2], [3], [4]];
        let t = [-1.0, -1.0, 1.0, 1.0];
        let h = [1.0; 4];
        let cfg = RegressionTreeConfig {
            max_depth: 1,
            min_samples: 1,
        };
        let tree = fit_regression_tree(x.view(), &t, &h, &cfg, Execution::Sequential);
        assert_eq!(
            tree,
            RegressionNode::Split {
                feature: 0,
                threshold: 2,
                left: Box::new(RegressionNode::Leaf { value: -1.0 }),
                right: Box::new(RegressionNode::Leaf { value: 1.0 }),
            }
        );
        assert_eq!(tree.predict(&[0]), -1.0);
        assert_eq!(tree.predict(&[9]), 1.0);
    }

    #[test]
    fn newton_leaf_uses_hessian() {
        let x = array![[1], [1]];
        let tree = fit_regression_tree(
            x.view(),
            &[0.5, 0.25],
            &[0.25, 0.5],
            &RegressionTreeConfig {
                max_depth: 3,
                min_samples: 1,
            },
            Execution::Sequential,
        );
        assert_eq!(tree, RegressionNode::Leaf { value: 1.0 });
    }

    #[test]
    fn zero_hessian_is_floored() {
        let x = array![[1]];
        let tree = fit_regression_tree(
            x.view(),
            &[0.0],
            &[0.0],
            &RegressionTreeConfig {
                max_depth: 2,
                min_samples: 1,
            },
            Execution::Sequential,
        );
        assert_eq!(tree, RegressionNode::Leaf { value: 0.0 });
    }

    #[test]
    fn depth_is_capped() {
        let x = ndarray::Array2::from_shape_fn((32, 3), |(i, j)| ((i >> j) & 3) as u32);
        let t: Vec<f64> = (0..32).map(|i| (i as f64).sin()).collect();
        let tree = fit_regression_tree(
            x.view(),
            &t,
            &[1.0; 32],
            &RegressionTreeConfig {
                max_depth: 2,
                min_samples: 1,
            },
            Execution::Sequential,
        );
        assert!(tree.depth() <= 2);
    }
}
