//! Batch gradient descent shared by the linear and logistic learners.

use ndarray::ArrayView2;

use super::{FitError, WeightVector};
use crate::exec::{Execution, CHUNK_ROWS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdConfig {
    pub learning_rate: f64,
    /// Stop once the L2 norm of the weight update falls below this.
    pub tolerance: f64,
    pub max_iters: usize,
    /// L2 penalty on the non-intercept weights, per row.
    pub l2: f64,
    /// Logistic training stops (and flags separation) when `||w||` exceeds this.
    pub weight_cap: f64,
    pub execution: Execution,
}

impl Default for GdConfig {
    fn default() -> Self {
        GdConfig {
            learning_rate: 0.01,
            tolerance: 1e-6,
            max_iters: 10_000,
            l2: 0.0,
            weight_cap: 1e3,
            execution: Execution::default(),
        }
    }
}

impl GdConfig {
    pub fn validate(&self) -> Result<(), FitError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(FitError::InvalidConfig(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(FitError::InvalidConfig(format!(
                "tolerance {} must be positive",
                self.tolerance
            )));
        }
        if self.max_iters == 0 {
            return Err(FitError::InvalidConfig(
                "max_iters must be at least 1".into(),
            ));
        }
        if !(self.l2 >= 0.0) {
            return Err(FitError::InvalidConfig("l2 must be non-negative".into()));
        }
        Ok(())
    }
}

/// Outcome of a gradient-descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct GdReport {
    pub weights: WeightVector,
    pub iterations: usize,
    pub final_loss: f64,
    pub converged: bool,
    /// Logistic only: the weight norm hit [`GdConfig::weight_cap`].
    pub separated: bool,
}

/// Loss and its gradient summed over rows. `per_row(z, y)` returns the row's
/// loss and the derivative of that loss with respect to `z = w . x`.
pub(crate) fn loss_and_gradient<F>(
    w: &WeightVector,
    x: ArrayView2<f64>,
    y: &[f64],
    exec: Execution,
    per_row: F,
) -> (f64, Vec<f64>)
where
    F: Fn(f64, f64) -> (f64, f64) + Sync + Send,
{
    let d = x.ncols();
    let parts = exec.map_chunks(x.nrows(), CHUNK_ROWS, |range| {
        let mut loss = 0.0;
        let mut grad = vec![0.0; d + 1];
        for i in range {
            let row = x.row(i);
            let z = w.0[0] + row.iter().zip(&w.0[1..]).map(|(a, b)| a * b).sum::<f64>();
            let (l, dz) = per_row(z, y[i]);
            loss += l;
            grad[0] += dz;
            for (g, v) in grad[1..].iter_mut().zip(row.iter()) {
                *g += dz * v;
            }
        }
        (loss, grad)
    });
    let mut loss = 0.0;
    let mut grad = vec![0.0; d + 1];
    for (l, g) in parts {
        loss += l;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    (loss, grad)
}

/// `w <- w - r * (grad / n + l2 * w)` until the step is shorter than the
/// tolerance. The summed gradient is divided by the row count so the learning
/// rate does not depend on dataset size.
pub(crate) fn descend<F>(
    n_features: usize,
    n_rows: usize,
    cfg: &GdConfig,
    cap_weights: bool,
    mut loss_grad: F,
) -> Result<GdReport, FitError>
where
    F: FnMut(&WeightVector) -> (f64, Vec<f64>),
{
    cfg.validate()?;
    let n = n_rows as f64;
    let mut w = WeightVector::zeros(n_features);
    let mut converged = false;
    let mut separated = false;
    let mut iterations = 0;
    for iter in 1..=cfg.max_iters {
        let (loss, grad) = loss_grad(&w);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(FitError::Diverged { iteration: iter });
        }
        let mut step_sq = 0.0;
        for (j, (wj, g)) in w.0.iter_mut().zip(&grad).enumerate() {
            let penalty = if j == 0 { 0.0 } else { cfg.l2 * *wj };
            let step = cfg.learning_rate * (g / n + penalty);
            *wj -= step;
            step_sq += step * step;
        }
        iterations = iter;
        if !w.is_finite() {
            return Err(FitError::Diverged { iteration: iter });
        }
        if step_sq.sqrt() < cfg.tolerance {
            converged = true;
            break;
        }
        if cap_weights && w.norm() > cfg.weight_cap {
            separated = true;
            break;
        }
    }
    let (final_loss, _) = loss_grad(&w);
    if !final_loss.is_finite() {
        return Err(FitError::Diverged {
            iteration: iterations,
        });
    }
    Ok(GdReport {
        weights: w,
        iterations,
        final_loss,
        converged,
        separated,
    })
}
