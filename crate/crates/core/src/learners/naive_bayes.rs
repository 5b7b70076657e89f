use serde::{Deserialize, Serialize};

use super::{require_both_classes, ClassifierSpec, FittedModel, TrainedModel};
use crate::error::Result;
use crate::matrix::Matrix;

/// Independent Gaussian class-conditionals with training-frequency priors.
/// Index 0 is the negative class, 1 the positive class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub log_prior: [f64; 2],
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
}

impl NaiveBayesModel {
    fn log_joint(&self, class: usize, row: &[f64]) -> f64 {
        let mut acc = self.log_prior[class];
        for (j, &v) in row.iter().enumerate() {
            let var = self.var[class][j];
            let d = v - self.mean[class][j];
            acc -= 0.5 * ((2.0 * std::f64::consts::PI * var).ln() + d * d / var);
        }
        acc
    }

    /// Posterior probability of the positive class.
    pub fn posterior(&self, row: &[f64]) -> f64 {
        let l0 = self.log_joint(0, row);
        let l1 = self.log_joint(1, row);
        // 1 / (1 + exp(l0 - l1)), written to avoid overflow
        let d = l0 - l1;
        if d > 0.0 {
            let e = (-d).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + d.exp())
        }
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        x.rows().map(|r| self.posterior(r)).collect()
    }
}

pub fn fit_gaussian_nb(x: &Matrix, y: &[bool], spec: &ClassifierSpec) -> Result<TrainedModel> {
    require_both_classes(x, y)?;
    spec.validate(x.n_cols())?;
    let floor = spec.param("var_floor").unwrap_or(1e-9);
    let m = x.n_cols();
    let mut count = [0usize; 2];
    let mut mean = [vec![0.0; m], vec![0.0; m]];
    for (row, &label) in x.rows().zip(y) {
        let c = usize::from(label);
        count[c] += 1;
        for j in 0..m {
            mean[c][j] += row[j];
        }
    }
    for c in 0..2 {
        mean[c].iter_mut().for_each(|v| *v /= count[c] as f64);
    }
    let mut var = [vec![0.0; m], vec![0.0; m]];
    for (row, &label) in x.rows().zip(y) {
        let c = usize::from(label);
        for j in 0..m {
            var[c][j] += (row[j] - mean[c][j]).powi(2);
        }
    }
    for c in 0..2 {
        var[c]
            .iter_mut()
            .for_each(|v| *v = (*v / count[c] as f64).max(floor));
    }
    let n = y.len() as f64;
    let model = NaiveBayesModel {
        log_prior: [
            (count[0] as f64 / n).ln(),
            (count[1] as f64 / n).ln(),
        ],
        mean,
        var,
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        columns: x.names().to_vec(),
        fitted: FittedModel::NaiveBayes(model),
        converged: true,
        notes: vec![],
    })
}
