//! k-nearest-neighbour scoring on standardized features, with k chosen by
//! stratified cross-validation when unset.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::standardize::Standardizer;
use super::{require_both_classes, ClassifierSpec, FittedModel, TrainedModel};
use crate::error::{Error, Result};
use crate::eval::auc;
use crate::matrix::Matrix;
use crate::seeds;

pub const DEFAULT_K_GRID: [usize; 6] = [1, 5, 11, 21, 51, 101];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub standardizer: Standardizer,
    /// Standardized training rows.
    pub train: Matrix,
    pub labels: Vec<bool>,
    /// Mean fold AUC per candidate when k was selected by cross-validation.
    pub cv_auc: Vec<(usize, f64)>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Training row indices ordered by (distance, index), truncated to `k`.
fn nearest(train: &Matrix, rows: &[usize], query: &[f64], k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = rows.iter().map(|&i| (sq_dist(train.row(i), query), i)).collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < d.len() {
        d.select_nth_unstable_by(k, cmp);
        d.truncate(k);
    }
    d.sort_unstable_by(cmp);
    d.into_iter().map(|(_, i)| i).collect()
}

impl KnnModel {
    fn standardize_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| self.scale(j, v))
            .collect()
    }

    fn scale(&self, j: usize, v: f64) -> f64 {
        let sd = if self.standardizer.is_constant(j) { 1.0 } else { self.standardizer.sd[j] };
        (v - self.standardizer.mean[j]) / sd
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        let all: Vec<usize> = (0..self.train.n_rows()).collect();
        (0..x.n_rows())
            .into_par_iter()
            .map(|i| {
                let q = self.standardize_row(x.row(i));
                let nn = nearest(&self.train, &all, &q, self.k);
                nn.iter().filter(|&&j| self.labels[j]).count() as f64 / nn.len() as f64
            })
            .collect()
    }
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
fn stratified_folds(y: &[bool], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = seeds::rng(seed, seeds::tag("knn-folds"));
    let mut fold = vec![0; y.len()];
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(&mut rng);
        for (r, i) in idx.into_iter().enumerate() {
            fold[i] = r % folds;
        }
    }
    fold
}

fn cross_validate(train: &Matrix, y: &[bool], grid: &[usize], folds: usize, seed: u64) -> Vec<(usize, f64)> {
    let assignment = stratified_folds(y, folds, seed);
    let k_max = *grid.iter().max().unwrap_or(&1);
    let per_fold: Vec<Option<Vec<f64>>> = (0..folds)
        .into_par_iter()
        .map(|f| {
            let fit_rows: Vec<usize> = (0..y.len()).filter(|&i| assignment[i] != f).collect();
            let held: Vec<usize> = (0..y.len()).filter(|&i| assignment[i] == f).collect();
            let held_labels: Vec<bool> = held.iter().map(|&i| y[i]).collect();
            if !crate::eval::has_both_classes(&held_labels) {
                return None;
            }
            let neighbours: Vec<Vec<usize>> = held
                .iter()
                .map(|&i| nearest(train, &fit_rows, train.row(i), k_max.min(fit_rows.len())))
                .collect();
            Some(
                grid.iter()
                    .map(|&k| {
                        let scores: Vec<f64> = neighbours
                            .iter()
                            .map(|nn| {
                                let top = &nn[..k.min(nn.len())];
                                top.iter().filter(|&&j| y[j]).count() as f64 / top.len() as f64
                            })
                            .collect();
                        auc(&scores, &held_labels).unwrap_or(f64::NAN)
                    })
                    .collect(),
            )
        })
        .collect();
    let valid: Vec<&Vec<f64>> = per_fold.iter().flatten().collect();
    grid.iter()
        .enumerate()
        .map(|(c, &k)| {
            let mean = valid.iter().map(|v| v[c]).sum::<f64>() / valid.len() as f64;
            (k, mean)
        })
        .collect()
}

pub fn fit_knn(x: &Matrix, y: &[bool], spec: &ClassifierSpec, seed: u64) -> Result<TrainedModel> {
    require_both_classes(x, y)?;
    spec.validate(x.n_cols())?;
    let n = x.n_rows();
    let mut model = KnnModel {
        k: 1,
        standardizer: Standardizer::fit(x),
        train: Matrix::new(vec![], 0, vec![])?,
        labels: y.to_vec(),
        cv_auc: vec![],
    };
    model.train = x.map_values(|j, v| model.scale(j, v));

    let k = match spec.param("k") {
        Some(k) => {
            let k = k as usize;
            if k > n {
                return Err(Error::Validation(format!("k = {k} exceeds {n} training rows")));
            }
            k
        }
        None => {
            let grid: Vec<usize> = DEFAULT_K_GRID.into_iter().filter(|&k| k < n).collect();
            if grid.is_empty() {
                return Err(Error::InvalidInput("empty k candidate grid".into()));
            }
            let folds = spec.int_param("folds", 10)?.min(n);
            let cv = cross_validate(&model.train, y, &grid, folds, seed);
            if cv.iter().all(|(_, a)| a.is_nan()) {
                return Err(Error::InvalidInput(
                    "no cross-validation fold contains both classes".into(),
                ));
            }
            let mut best = cv[0];
            for &(k, a) in &cv[1..] {
                if a > best.1 || best.1.is_nan() {
                    best = (k, a);
                }
            }
            model.cv_auc = cv;
            best.0
        }
    };
    model.k = k;
    let mut fitted_spec = spec.clone();
    fitted_spec.set_param("k", k as f64);
    Ok(TrainedModel {
        spec: fitted_spec,
        columns: x.names().to_vec(),
        fitted: FittedModel::Knn(model),
        converged: true,
        notes: vec![],
    })
}
