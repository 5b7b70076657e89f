//! L1-penalized logistic regression by cyclic coordinate descent.
//!
//! Minimizes `mean NLL(b0, beta) + lambda * sum |beta_j|` on standardized
//! columns. Each outer iteration forms the quadratic (IRLS) approximation of
//! the log-likelihood at the current iterate and solves the penalized
//! weighted least-squares problem by coordinate descent with the
//! soft-threshold update; a backtracking step on the exact objective keeps
//! the outer iteration monotone.

use super::logistic::{mean_nll, sigmoid, LinearModel, StandardizedFit};
use super::standardize::Standardizer;
use super::{require_both_classes, ClassifierSpec, FittedModel, TrainedModel};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

const MIN_WEIGHT: f64 = 1e-5;
const MAX_INNER_SWEEPS: usize = 10_000;

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    z.signum() * (z.abs() - gamma).max(0.0)
}

/// Standardized non-constant columns, stored column-major.
struct Design {
    standardizer: Standardizer,
    active: Vec<usize>,
    cols: Vec<Vec<f64>>,
    n: usize,
}

impl Design {
    fn new(x: &Matrix) -> Design {
        let standardizer = Standardizer::fit(x);
        let active: Vec<usize> = (0..x.n_cols())
            .filter(|&j| !standardizer.is_constant(j))
            .collect();
        let cols = active
            .iter()
            .map(|&j| x.column(j).map(|v| standardizer.apply(j, v)).collect())
            .collect();
        Design {
            standardizer,
            active,
            cols,
            n: x.n_rows(),
        }
    }

    fn eta(&self, b0: f64, beta: &[f64]) -> Vec<f64> {
        let mut eta = vec![b0; self.n];
        for (col, &b) in self.cols.iter().zip(beta) {
            if b != 0.0 {
                for (e, z) in eta.iter_mut().zip(col) {
                    *e += b * z;
                }
            }
        }
        eta
    }

    fn objective(&self, y: &[bool], b0: f64, beta: &[f64], lambda: f64) -> f64 {
        mean_nll(&self.eta(b0, beta), y) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
    }
}

fn prevalence_logit(y: &[bool]) -> f64 {
    let p = y.iter().filter(|&&v| v).count() as f64 / y.len() as f64;
    (p / (1.0 - p)).ln()
}

/// Smallest penalty at which every coefficient is zero, on standardized
/// columns: `max_j |mean(z_ij * (y_i - ybar))|`.
pub fn lambda_max(x: &Matrix, y: &[bool]) -> Result<f64> {
    require_both_classes(x, y)?;
    let d = Design::new(x);
    let ybar = y.iter().filter(|&&v| v).count() as f64 / y.len() as f64;
    Ok(d.cols
        .iter()
        .map(|col| {
            (col.iter()
                .zip(y)
                .map(|(z, &yi)| z * (f64::from(u8::from(yi)) - ybar))
                .sum::<f64>()
                / d.n as f64)
                .abs()
        })
        .fold(0.0, f64::max))
}

/// `n` log-spaced penalties from `lambda_max` down to `lambda_max * 1e-4`.
pub fn lambda_grid(x: &Matrix, y: &[bool], n: usize) -> Result<Vec<f64>> {
    let hi = lambda_max(x, y)?;
    if n < 2 {
        return Ok(vec![hi]);
    }
    let ratio: f64 = 1e-4;
    Ok((0..n)
        .map(|k| hi * ratio.powf(k as f64 / (n - 1) as f64))
        .collect())
}

pub fn fit_lasso_logistic(x: &Matrix, y: &[bool], spec: &ClassifierSpec) -> Result<TrainedModel> {
    require_both_classes(x, y)?;
    spec.validate(x.n_cols())?;
    if x.n_rows() < 2 {
        return Err(Error::InvalidInput("lasso needs at least 2 rows".into()));
    }
    let max_iter = spec.int_param("max_iter", 100)?;
    let tol = spec.param("tol").unwrap_or(1e-8);
    let d = Design::new(x);
    let lambda = match spec.param("lambda") {
        Some(l) => l,
        None => 1e-2 * lambda_max(x, y)?,
    };

    let mut notes = Vec::new();
    let dropped: Vec<&str> = (0..x.n_cols())
        .filter(|j| d.standardizer.is_constant(*j))
        .map(|j| x.names()[j].as_str())
        .collect();
    if !dropped.is_empty() {
        log::debug!("lasso: dropping {} constant column(s)", dropped.len());
        notes.push(format!("constant columns dropped: {}", dropped.join(",")));
    }

    let p = d.cols.len();
    let n = d.n as f64;
    let yv: Vec<f64> = y.iter().map(|&v| f64::from(u8::from(v))).collect();
    let mut b0 = prevalence_logit(y);
    let mut beta = vec![0.0; p];
    let mut objective = d.objective(y, b0, &beta, lambda);
    let mut converged = false;
    // inexact inner solves: accuracy tightens as the outer steps shrink
    let mut inner_tol = 1e-3;

    for _ in 0..max_iter {
        let eta = d.eta(b0, &beta);
        let prob: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
        let w: Vec<f64> = prob.iter().map(|p| (p * (1.0 - p)).max(MIN_WEIGHT)).collect();
        // residual of the working response: z - eta = (y - p) / w
        let mut res: Vec<f64> = (0..d.n).map(|i| (yv[i] - prob[i]) / w[i]).collect();
        let w_sum: f64 = w.iter().sum();
        let curv: Vec<f64> = d
            .cols
            .iter()
            .map(|col| col.iter().zip(&w).map(|(z, wi)| wi * z * z).sum::<f64>() / n)
            .collect();

        let mut nb0 = b0;
        let mut nbeta = beta.clone();
        // full sweeps alternate with sweeps over the non-zero coefficients
        // until a full sweep changes nothing
        let mut full = true;
        for _ in 0..MAX_INNER_SWEEPS {
            let mut max_change: f64 = 0.0;
            let shift = res.iter().zip(&w).map(|(r, wi)| r * wi).sum::<f64>() / w_sum;
            if shift != 0.0 {
                nb0 += shift;
                res.iter_mut().for_each(|r| *r -= shift);
                max_change = max_change.max(shift.abs());
            }
            for j in 0..p {
                if !full && nbeta[j] == 0.0 {
                    continue;
                }
                let col = &d.cols[j];
                let old = nbeta[j];
                let grad = col
                    .iter()
                    .zip(&res)
                    .zip(&w)
                    .map(|((z, r), wi)| wi * z * r)
                    .sum::<f64>()
                    / n
                    + curv[j] * old;
                let new = soft_threshold(grad, lambda) / curv[j];
                if new != old {
                    let delta = new - old;
                    for (r, z) in res.iter_mut().zip(col) {
                        *r -= delta * z;
                    }
                    nbeta[j] = new;
                    max_change = max_change.max(delta.abs() * curv[j].sqrt());
                }
            }
            let settled = max_change < inner_tol;
            if settled && full {
                break;
            }
            full = settled;
        }

        // backtrack on the exact objective
        let mut t = 1.0;
        let (mut cb0, mut cbeta) = (nb0, nbeta.clone());
        let mut cand = d.objective(y, cb0, &cbeta, lambda);
        while cand > objective && t > 1e-10 {
            t *= 0.5;
            cb0 = b0 + t * (nb0 - b0);
            cbeta = beta
                .iter()
                .zip(&nbeta)
                .map(|(o, nw)| o + t * (nw - o))
                .collect();
            cand = d.objective(y, cb0, &cbeta, lambda);
        }
        let change = beta
            .iter()
            .zip(&cbeta)
            .map(|(o, nw)| (o - nw).abs())
            .fold((b0 - cb0).abs(), f64::max);
        b0 = cb0;
        beta = cbeta;
        objective = cand.min(objective);
        inner_tol = (change * 1e-2).clamp(tol * 1e-1, 1e-3);
        if change < tol && inner_tol <= tol * 1e-1 {
            converged = true;
            break;
        }
    }
    if !converged {
        notes.push(format!("coordinate descent did not converge in {max_iter} iterations"));
    }

    // back to the original scale
    let m = x.n_cols();
    let mut coefficients = vec![0.0; m];
    let mut intercept = b0;
    let mut standardized = vec![0.0; m];
    for (k, &j) in d.active.iter().enumerate() {
        let sd = d.standardizer.sd[j];
        coefficients[j] = beta[k] / sd;
        standardized[j] = beta[k];
        intercept -= beta[k] * d.standardizer.mean[j] / sd;
    }
    let mut fitted_spec = spec.clone();
    fitted_spec.set_param("lambda", lambda);
    Ok(TrainedModel {
        spec: fitted_spec,
        columns: x.names().to_vec(),
        fitted: FittedModel::Linear(LinearModel {
            intercept,
            coefficients,
            standardized: Some(StandardizedFit {
                standardizer: d.standardizer,
                intercept: b0,
                coefficients: standardized,
            }),
        }),
        converged,
        notes,
    })
}
