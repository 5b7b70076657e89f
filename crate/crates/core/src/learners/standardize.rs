use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

/// Per-column mean and population standard deviation. Columns whose
/// standard deviation is zero are reported as constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Standardizer {
        let n = x.n_rows().max(1) as f64;
        let m = x.n_cols();
        let mut mean = vec![0.0; m];
        for row in x.rows() {
            for (acc, v) in mean.iter_mut().zip(row) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= n);
        let mut var = vec![0.0; m];
        for row in x.rows() {
            for j in 0..m {
                var[j] += (row[j] - mean[j]).powi(2);
            }
        }
        let sd = var
            .into_iter()
            .zip(&mean)
            .map(|(v, mu)| {
                let sd = (v / n).sqrt();
                // differences at rounding level are treated as constant
                if sd <= 1e-12 * mu.abs().max(1.0) {
                    0.0
                } else {
                    sd
                }
            })
            .collect();
        Standardizer { mean, sd }
    }

    pub fn is_constant(&self, j: usize) -> bool {
        self.sd[j] == 0.0
    }

    /// Standardized value; constant columns map to zero.
    pub fn apply(&self, j: usize, v: f64) -> f64 {
        if self.is_constant(j) {
            0.0
        } else {
            (v - self.mean[j]) / self.sd[j]
        }
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        x.map_values(|j, v| self.apply(j, v))
    }
}
