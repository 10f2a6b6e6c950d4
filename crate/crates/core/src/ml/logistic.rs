//! Binary logistic regression and the K-class softmax.

use ndarray::ArrayView2;

use super::gd::{descend, loss_and_gradient, GdConfig, GdReport};
use super::{check_xy, FitError, WeightVector};
use crate::exec::Execution;

/// `1 / (1 + e^-z)`, evaluated on whichever side avoids overflow.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow for large `z`.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn log_loss_row(z: f64, y: f64) -> (f64, f64) {
    // -[y ln s(z) + (1-y) ln(1-s(z))] == softplus(z) - y z
    (softplus(z) - y * z, sigmoid(z) - y)
}

/// Summed binary cross-entropy of `sigmoid(w . x)` against `y`.
pub fn log_loss(w: &WeightVector, x: ArrayView2<f64>, y: &[f64]) -> f64 {
    loss_and_gradient(w, x, y, Execution::Sequential, log_loss_row).0
}

pub fn log_loss_gradient(w: &WeightVector, x: ArrayView2<f64>, y: &[f64]) -> Vec<f64> {
    loss_and_gradient(w, x, y, Execution::Sequential, log_loss_row).1
}

/// Batch gradient descent on [`log_loss`]. Labels must be 0 or 1.
pub fn fit_logistic(x: ArrayView2<f64>, y: &[f64], cfg: &GdConfig) -> Result<GdReport, FitError> {
    check_xy(x.nrows(), y.len())?;
    if let Some(bad) = y.iter().find(|v| **v != 0.0 && **v != 1.0) {
        return Err(FitError::NonBinaryLabel(*bad));
    }
    descend(x.ncols(), x.nrows(), cfg, true, |w| {
        loss_and_gradient(w, x, y, cfg.execution, log_loss_row)
    })
}

pub fn predict_proba_logistic(w: &WeightVector, x: &[f64]) -> f64 {
    sigmoid(w.decision(x))
}

/// Class probabilities `exp(w_k . x) / sum_j exp(w_j . x)` for `K >= 2`
/// weight vectors. Returns `None` when fewer than two are given.
pub fn softmax_proba(weights: &[WeightVector], x: &[f64]) -> Option<Vec<f64>> {
    if weights.len() < 2 {
        return None;
    }
    let logits: Vec<f64> = weights.iter().map(|w| w.decision(x)).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Some(exps.into_iter().map(|e| e / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_give_one_half() {
        let w = WeightVector::zeros(3);
        assert_eq!(predict_proba_logistic(&w, &[1.0, -4.0, 9.0]), 0.5);
    }

    #[test]
    fn sigmoid_extremes_stay_finite() {
        assert_eq!(sigmoid(800.0), 1.0);
        assert_eq!(sigmoid(-800.0), 0.0);
        assert!(softplus(800.0).is_finite());
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn separable_line() {
        let x = array![[-3.0], [-2.0], [-1.0], [1.0], [2.0], [3.0]];
        let y = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let cfg = GdConfig {
            learning_rate: 0.5,
            ..Default::default()
        };
        let rep = fit_logistic(x.view(), &y, &cfg).unwrap();
        for (row, label) in x.rows().into_iter().zip(y) {
            let p = predict_proba_logistic(&rep.weights, row.as_slice().unwrap());
            assert_eq!(p > 0.5, label == 1.0);
        }
    }

    #[test]
    fn separation_trips_the_cap() {
        let x = array![[-1.0], [1.0]];
        let cfg = GdConfig {
            learning_rate: 50.0,
            weight_cap: 20.0,
            max_iters: 100_000,
            ..Default::default()
        };
        let rep = fit_logistic(x.view(), &[0.0, 1.0], &cfg).unwrap();
        assert!(rep.separated);
        assert!(rep.weights.is_finite());
    }

    #[test]
    fn rejects_non_binary_labels() {
        let x = array![[0.0], [1.0]];
        assert!(matches!(
            fit_logistic(x.view(), &[0.0, 2.0], &GdConfig::default()),
            Err(FitError::NonBinaryLabel(_))
        ));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x = Array2::from_shape_fn((15, 3), |_| rng.random_range(-2.0..2.0));
            let y: Vec<f64> = (0..15)
                .map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 })
                .collect();
            let w = WeightVector((0..4).map(|_| rng.random_range(-1.0..1.0)).collect());
            let g = log_loss_gradient(&w, x.view(), &y);
            for j in 0..4 {
                let h = 1e-5;
                let mut up = w.clone();
                up.0[j] += h;
                let mut down = w.clone();
                down.0[j] -= h;
                let fd = (log_loss(&up, x.view(), &y) - log_loss(&down, x.view(), &y)) / (2.0 * h);
                let rel = (fd - g[j]).abs() / g[j].abs().max(1e-8);
                assert!(rel < 1e-4, "component {j}: analytic {} vs fd {fd}", g[j]);
            }
        }
    }

    #[test]
    fn softmax_properties() {
        let w = WeightVector(vec![0.3, -1.0, 2.0]);
        let p = softmax_proba(&[w.clone(), w.clone(), w.clone()], &[1.0, 2.0]).unwrap();
        for v in &p {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }

        let a = WeightVector(vec![0.5, 1.5]);
        let b = WeightVector(vec![-0.25, 0.5]);
        let p = softmax_proba(&[a.clone(), b.clone()], &[0.7]).unwrap();
        let diff = WeightVector(vec![0.75, 1.0]);
        assert!((p[0] - predict_proba_logistic(&diff, &[0.7])).abs() < 1e-15);

        let big =
            softmax_proba(&[WeightVector(vec![1000.0]), WeightVector(vec![0.0])], &[]).unwrap();
        assert_eq!(big[0], 1.0);
        // e^-1000 underflows to zero in double precision
        assert_eq!(big[1], 0.0);

        assert!(softmax_proba(&[a], &[0.0]).is_none());
    }
}
