//! Least-squares linear regression trained by gradient descent on the
//! residual sum of squares.

use ndarray::ArrayView2;

use super::gd::{descend, loss_and_gradient, GdConfig, GdReport};
use super::{check_xy, FitError, WeightVector};
use crate::exec::Execution;

fn rss_row(z: f64, y: f64) -> (f64, f64) {
    let e = y - z;
    (e * e, -2.0 * e)
}

/// Residual sum of squares `sum((y - w . x)^2)`.
pub fn rss(w: &WeightVector, x: ArrayView2<f64>, y: &[f64]) -> f64 {
    loss_and_gradient(w, x, y, Execution::Sequential, rss_row).0
}

/// Gradient of [`rss`] with respect to every weight, intercept first.
pub fn rss_gradient(w: &WeightVector, x: ArrayView2<f64>, y: &[f64]) -> Vec<f64> {
    loss_and_gradient(w, x, y, Execution::Sequential, rss_row).1
}

/// Fits `y ~ w . x` by batch gradient descent from zero weights.
/// `final_loss` in the report is the RSS at the returned weights.
pub fn fit_linear_regression(
    x: ArrayView2<f64>,
    y: &[f64],
    cfg: &GdConfig,
) -> Result<GdReport, FitError> {
    check_xy(x.nrows(), y.len())?;
    descend(x.ncols(), x.nrows(), cfg, false, |w| {
        loss_and_gradient(w, x, y, cfg.execution, rss_row)
    })
}
