use ndarray::{ArrayView2, Axis};

use super::{check_xy, FitError};

/// Relative floor applied to per-class variances.
pub const VARIANCE_FLOOR_RATIO: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNbModel {
    /// Sorted class labels; every other table is indexed in this order.
    pub classes: Vec<u32>,
    pub priors: Vec<f64>,
    /// `means[c][i]`: mean of feature `i` within class `c`.
    pub means: Vec<Vec<f64>>,
    /// Population variances, already floored.
    pub variances: Vec<Vec<f64>>,
    pub variance_floor: f64,
}

/// Fits class priors and per-class Gaussian feature densities.
pub fn fit_gaussian_nb(x: ArrayView2<f64>, y: &[u32]) -> Result<GaussianNbModel, FitError> {
    check_xy(x.nrows(), y.len())?;
    let mut classes: Vec<u32> = y.to_vec();
    classes.sort_unstable();
    classes.dedup();

    let n = y.len() as f64;
    let max_var = x
        .axis_iter(Axis(1))
        .map(|c| c.var(0.0))
        .fold(0.0f64, f64::max);
    let floor = VARIANCE_FLOOR_RATIO * max_var.max(1e-9);

    let d = x.ncols();
    let mut priors = Vec::with_capacity(classes.len());
    let mut means = Vec::with_capacity(classes.len());
    let mut variances = Vec::with_capacity(classes.len());
    for &c in &classes {
        let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        let nc = rows.len() as f64;
        priors.push(nc / n);
        let mu: Vec<f64> = (0..d)
            .map(|j| rows.iter().map(|&i| x[[i, j]]).sum::<f64>() / nc)
            .collect();
        let var: Vec<f64> = (0..d)
            .map(|j| {
                let v = rows
                    .iter()
                    .map(|&i| (x[[i, j]] - mu[j]).powi(2))
                    .sum::<f64>()
                    / nc;
                v.max(floor)
            })
            .collect();
        means.push(mu);
        variances.push(var);
    }
    Ok(GaussianNbModel {
        classes,
        priors,
        means,
        variances,
        variance_floor: floor,
    })
}

impl GaussianNbModel {
    pub fn n_features(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    /// `log P(c) + sum_i log N(x_i; mu, var)` for every class.
    pub fn joint_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        const LN_2PI: f64 = 1.837_877_066_409_345_5;
        self.priors
            .iter()
            .zip(self.means.iter().zip(&self.variances))
            .map(|(prior, (mu, var))| {
                let dens: f64 = x
                    .iter()
                    .zip(mu.iter().zip(var))
                    .map(|(v, (m, s2))| -0.5 * (LN_2PI + s2.ln()) - (v - m) * (v - m) / (2.0 * s2))
                    .sum();
                prior.ln() + dens
            })
            .collect()
    }

    /// Posterior over [`Self::classes`], normalised with log-sum-exp.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let jll = self.joint_log_likelihood(x);
        let max = jll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shifted: Vec<f64> = jll.iter().map(|v| (v - max).exp()).collect();
        let total: f64 = shifted.iter().sum();
        shifted.into_iter().map(|v| v / total).collect()
    }

    /// Posterior of class 1, or 0 when class 1 never occurred in training.
    pub fn proba_of(&self, class: u32, x: &[f64]) -> f64 {
        match self.classes.iter().position(|&c| c == class) {
            Some(k) => self.predict_proba(x)[k],
            None => 0.0,
        }
    }
}

pub fn predict_proba_nb(model: &GaussianNbModel, x: &[f64]) -> Vec<f64> {
    model.predict_proba(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn midpoint_is_even() {
        let x = array![[0.0], [0.0], [10.0], [10.0]];
        let m = fit_gaussian_nb(x.view(), &[0, 0, 1, 1]).unwrap();
        // both classes have zero variance, so the shared floor applies
        let p = m.predict_proba(&[5.0]);
        assert!((p[0] - 0.5).abs() < 1e-12, "{p:?}");
    }

    #[test]
    fn hand_computed_posterior() {
        let x = array![[1.0], [2.0], [4.0], [6.0]];
        let m = fit_gaussian_nb(x.view(), &[0, 0, 1, 1]).unwrap();
        assert_eq!(m.means, vec![vec![1.5], vec![5.0]]);
        assert_eq!(m.variances, vec![vec![0.25], vec![1.0]]);
        let dens = |x: f64, mu: f64, var: f64| {
            (-(x - mu) * (x - mu) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
        };
        let a = dens(2.0, 1.5, 0.25);
        let b = dens(2.0, 5.0, 1.0);
        let expected = a / (a + b);
        assert!((m.predict_proba(&[2.0])[0] - expected).abs() < 1e-9);
    }

    #[test]
    fn priors_and_floor() {
        let x = array![[3.0, 1.0], [3.0, 2.0], [3.0, 8.0]];
        let m = fit_gaussian_nb(x.view(), &[1, 1, 0]).unwrap();
        assert!((m.priors.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m
            .variances
            .iter()
            .flatten()
            .all(|v| *v >= m.variance_floor && *v > 0.0));
        assert!(m.predict_proba(&[3.0, 1.5]).iter().all(|p| p.is_finite()));
    }

    #[test]
    fn empty_input_is_an_error() {
        let x = ndarray::Array2::<f64>::zeros((0, 2));
        assert!(fit_gaussian_nb(x.view(), &[]).is_err());
    }
}
