use ndarray::{ArrayView2, Axis};

/// Linear-model weights; index 0 is the intercept, so a model over `d`
/// features holds `d + 1` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(pub Vec<f64>);

impl WeightVector {
    pub fn zeros(n_features: usize) -> Self {
        WeightVector(vec![0.0; n_features + 1])
    }

    pub fn n_features(&self) -> usize {
        self.0.len() - 1
    }

    pub fn intercept(&self) -> f64 {
        self.0[0]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.0[1..]
    }

    /// `w0 + sum(w_i * x_i)`.
    pub fn decision(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n_features());
        self.0[0] + self.0[1..].iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|w| w.is_finite())
    }
}

/// Per-feature z-score transform fitted on training data. Constant features
/// get scale 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: ArrayView2<f64>) -> Self {
        let n = x.nrows().max(1) as f64;
        let mean: Vec<f64> = x.axis_iter(Axis(1)).map(|c| c.sum() / n).collect();
        let scale = x
            .axis_iter(Axis(1))
            .zip(&mean)
            .map(|(c, m)| {
                let var = c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Scaler { mean, scale }
    }

    pub fn transform_row(&self, x: &mut [f64]) {
        for ((v, m), s) in x.iter_mut().zip(&self.mean).zip(&self.scale) {
            *v = (*v - m) / s;
        }
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> ndarray::Array2<f64> {
        let mut out = x.to_owned();
        for mut row in out.rows_mut() {
            self.transform_row(row.as_slice_mut().expect("owned rows are contiguous"));
        }
        out
    }
}
