//! Unpenalized logistic regression by iteratively reweighted least squares.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::standardize::Standardizer;
use super::{require_both_classes, ClassifierSpec, FittedModel, TrainedModel};
use crate::error::Result;
use crate::matrix::Matrix;

/// Above this |eta| the fitted probabilities are saturated and the
/// iteration is treated as diverging (separation).
const MAX_ABS_ETA: f64 = 30.0;
/// Every fitted probability within about 5e-5 of its label.
const SEPARATED_ETA: f64 = 10.0;

pub(crate) fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(eta)) without overflow.
fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

pub(crate) fn mean_nll(eta: &[f64], y: &[bool]) -> f64 {
    eta.iter()
        .zip(y)
        .map(|(&e, &yi)| softplus(e) - if yi { e } else { 0.0 })
        .sum::<f64>()
        / eta.len() as f64
}

/// The fit on standardized columns, kept for diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedFit {
    pub standardizer: Standardizer,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    /// One coefficient per training column, original scale.
    pub coefficients: Vec<f64>,
    pub standardized: Option<StandardizedFit>,
}

impl LinearModel {
    pub fn linear_predictor(&self, row: &[f64]) -> f64 {
        self.intercept
            + row
                .iter()
                .zip(&self.coefficients)
                .map(|(x, b)| x * b)
                .sum::<f64>()
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        x.rows().map(|r| sigmoid(self.linear_predictor(r))).collect()
    }
}

fn eta_of(x: &Matrix, beta: &DVector<f64>) -> Vec<f64> {
    x.rows()
        .map(|r| beta[0] + r.iter().enumerate().map(|(j, v)| v * beta[j + 1]).sum::<f64>())
        .collect()
}

/// Mean log-likelihood gradient with respect to (intercept, coefficients).
fn gradient(x: &Matrix, y: &[bool], eta: &[f64]) -> DVector<f64> {
    let m = x.n_cols();
    let n = x.n_rows() as f64;
    let mut g = DVector::zeros(m + 1);
    for (i, row) in x.rows().enumerate() {
        let r = f64::from(u8::from(y[i])) - sigmoid(eta[i]);
        g[0] += r;
        for j in 0..m {
            g[j + 1] += r * row[j];
        }
    }
    g / n
}

fn hessian(x: &Matrix, eta: &[f64]) -> DMatrix<f64> {
    let m = x.n_cols();
    let n = x.n_rows() as f64;
    let mut h = DMatrix::zeros(m + 1, m + 1);
    let mut xi = vec![0.0; m + 1];
    for (i, row) in x.rows().enumerate() {
        let p = sigmoid(eta[i]);
        let w = p * (1.0 - p);
        xi[0] = 1.0;
        xi[1..].copy_from_slice(row);
        for a in 0..=m {
            let wa = w * xi[a];
            if wa == 0.0 {
                continue;
            }
            for b in a..=m {
                h[(a, b)] += wa * xi[b];
            }
        }
    }
    for a in 0..=m {
        for b in 0..a {
            h[(a, b)] = h[(b, a)];
        }
    }
    h / n
}

/// Newton step `H^-1 g`; rank-deficient Hessians get a small ridge.
fn newton_step(h: DMatrix<f64>, g: &DVector<f64>) -> Option<(DVector<f64>, bool)> {
    if let Some(ch) = h.clone().cholesky() {
        return Some((ch.solve(g), false));
    }
    let scale = h.diagonal().iter().fold(0.0f64, |a, &b| a.max(b)).max(1e-12);
    let mut ridged = h;
    for a in 0..ridged.nrows() {
        ridged[(a, a)] += 1e-8 * scale;
    }
    ridged.cholesky().map(|ch| (ch.solve(g), true))
}

pub fn fit_logistic(x: &Matrix, y: &[bool], spec: &ClassifierSpec) -> Result<TrainedModel> {
    require_both_classes(x, y)?;
    spec.validate(x.n_cols())?;
    let max_iter = spec.int_param("max_iter", 100)?;
    let tol = spec.param("tol").unwrap_or(1e-8);
    let m = x.n_cols();

    let prev = y.iter().filter(|&&v| v).count() as f64 / y.len() as f64;
    let mut beta = DVector::zeros(m + 1);
    beta[0] = (prev / (1.0 - prev)).ln();
    let mut eta = eta_of(x, &beta);
    let mut nll = mean_nll(&eta, y);
    let mut notes = Vec::new();
    let mut converged = false;
    let mut ridged = false;

    for _ in 0..max_iter {
        let g = gradient(x, y, &eta);
        if g.amax() < tol {
            converged = true;
            break;
        }
        let Some((step, used_ridge)) = newton_step(hessian(x, &eta), &g) else {
            notes.push("singular Hessian".into());
            break;
        };
        ridged |= used_ridge;
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-10 {
            let cand = &beta + &step * t;
            let cand_eta = eta_of(x, &cand);
            let cand_nll = mean_nll(&cand_eta, y);
            if cand_nll <= nll + 1e-15 {
                accepted = Some((cand, cand_eta, cand_nll));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, cand_eta, cand_nll)) = accepted else {
            notes.push("line search failed".into());
            break;
        };
        if cand_eta.iter().any(|e| e.abs() > MAX_ABS_ETA) {
            // keep the last iterate before the probabilities saturate
            notes.push("separation: fitted probabilities saturated".into());
            break;
        }
        beta = cand;
        eta = cand_eta;
        nll = cand_nll;
    }
    // a tiny gradient on separated data means the likelihood is still
    // climbing toward infinite coefficients, not that a maximum was found
    if converged && eta.iter().zip(y).all(|(&e, &yi)| (e > 0.0) == yi && e.abs() > SEPARATED_ETA) {
        converged = false;
        notes.push("separation: classes perfectly separated".into());
    }
    if ridged {
        notes.push("rank-deficient design".into());
    }
    if !converged && notes.is_empty() {
        notes.push(format!("IRLS did not converge in {max_iter} iterations"));
    }

    Ok(TrainedModel {
        spec: spec.clone(),
        columns: x.names().to_vec(),
        fitted: FittedModel::Linear(LinearModel {
            intercept: beta[0],
            coefficients: beta.iter().skip(1).copied().collect(),
            standardized: None,
        }),
        converged,
        notes,
    })
}
