//! Classifiers behind one fit/score contract, plus class rebalancing.
//!
//! Every family is fitted with [`fit`] from a [`ClassifierSpec`] and scored
//! with [`predict_scores`]. Scores are in `[0, 1]`, higher meaning more
//! likely positive. Models remember their training column names and refuse
//! matrices with a different schema.

mod forest;
mod knn;
mod lasso;
mod logistic;
mod model_io;
mod naive_bayes;
mod resample;
mod standardize;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use forest::{fit_balanced_rf, Forest, Node, Tree};
pub use knn::{fit_knn, KnnModel, DEFAULT_K_GRID};
pub use lasso::{fit_lasso_logistic, lambda_grid, lambda_max};
pub use logistic::{fit_logistic, LinearModel};
pub use model_io::{load_model, save_model, MODEL_FORMAT_VERSION};
pub use naive_bayes::{fit_gaussian_nb, NaiveBayesModel};
pub use resample::{down_sample, resample, up_sample};
pub use standardize::Standardizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RandomForest,
    LassoLogistic,
    Logistic,
    NaiveBayes,
    Knn,
    /// Reserved; fitting reports "not implemented".
    Svm,
    /// Reserved; fitting reports "not implemented".
    NeuralNet,
}

impl Family {
    pub const IMPLEMENTED: [Family; 5] = [
        Family::RandomForest,
        Family::LassoLogistic,
        Family::Logistic,
        Family::NaiveBayes,
        Family::Knn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::RandomForest => "random_forest",
            Family::LassoLogistic => "lasso_logistic",
            Family::Logistic => "logistic",
            Family::NaiveBayes => "naive_bayes",
            Family::Knn => "knn",
            Family::Svm => "svm",
            Family::NeuralNet => "neural_net",
        }
    }

    /// Parameter names a spec of this family may carry.
    fn allowed_params(self) -> &'static [&'static str] {
        match self {
            Family::RandomForest => &["n_trees", "mtry", "min_node_size", "balanced"],
            Family::LassoLogistic => &["lambda", "max_iter", "tol"],
            Family::Logistic => &["max_iter", "tol"],
            Family::NaiveBayes => &["var_floor"],
            Family::Knn => &["k", "folds"],
            Family::Svm | Family::NeuralNet => &[],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Family::RandomForest,
            Family::LassoLogistic,
            Family::Logistic,
            Family::NaiveBayes,
            Family::Knn,
            Family::Svm,
            Family::NeuralNet,
        ]
        .into_iter()
        .find(|f| f.as_str() == s)
        .ok_or_else(|| Error::Parse(format!("unknown classifier family {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    #[default]
    None,
    Up,
    Down,
}

impl Sampling {
    pub const ALL: [Sampling; 3] = [Sampling::None, Sampling::Up, Sampling::Down];

    pub fn as_str(self) -> &'static str {
        match self {
            Sampling::None => "none",
            Sampling::Up => "up",
            Sampling::Down => "down",
        }
    }
}

impl fmt::Display for Sampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Sampling::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown sampling {s:?}")))
    }
}

/// A classifier family with its parameters and training-set rebalancing.
///
/// Parameters are kept as an ordered name/value list so the tuner can vary
/// them uniformly. Parameters left unset take family defaults at fit time;
/// `mtry` defaults to `floor(sqrt(m))` and an unset knn `k` is chosen by
/// cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub family: Family,
    pub params: Vec<(String, f64)>,
    pub sampling: Sampling,
}

impl ClassifierSpec {
    pub fn new(family: Family) -> Self {
        let params: Vec<(String, f64)> = match family {
            Family::RandomForest => vec![
                ("n_trees".into(), 1000.0),
                ("min_node_size".into(), 1.0),
                ("balanced".into(), 1.0),
            ],
            Family::LassoLogistic => vec![("max_iter".into(), 100.0), ("tol".into(), 1e-8)],
            Family::Logistic => vec![("max_iter".into(), 100.0), ("tol".into(), 1e-8)],
            Family::NaiveBayes => vec![("var_floor".into(), 1e-9)],
            Family::Knn => vec![("folds".into(), 10.0)],
            Family::Svm | Family::NeuralNet => vec![],
        };
        ClassifierSpec {
            family,
            params,
            sampling: Sampling::None,
        }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn set_param(&mut self, name: &str, value: f64) {
        match self.params.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = value,
            None => self.params.push((name.to_string(), value)),
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.set_param(name, value);
        self
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    /// `name=value;name=value` in parameter order.
    pub fn params_string(&self) -> String {
        self.params
            .iter()
            .map(|(n, v)| format!("{n}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Inverse of [`params_string`](Self::params_string), layered over the
    /// family defaults.
    pub fn parse(family: Family, params: &str, sampling: Sampling) -> Result<Self> {
        let mut spec = ClassifierSpec::new(family).with_sampling(sampling);
        for kv in params.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad parameter {kv:?}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad value for parameter {k:?}: {v:?}")))?;
            spec.set_param(k.trim(), v);
        }
        Ok(spec)
    }

    fn int_param(&self, name: &str, default: usize) -> Result<usize> {
        match self.param(name) {
            None => Ok(default),
            Some(v) if v >= 0.0 && v.fract() == 0.0 && v.is_finite() => Ok(v as usize),
            Some(v) => Err(Error::Validation(format!(
                "{} parameter {name} must be a non-negative integer, got {v}",
                self.family
            ))),
        }
    }

    /// Checks parameter names and ranges for a design with `m` columns.
    pub fn validate(&self, m: usize) -> Result<()> {
        let allowed = self.family.allowed_params();
        for (name, v) in &self.params {
            if !allowed.contains(&name.as_str()) {
                return Err(Error::Validation(format!(
                    "{} does not take parameter {name:?}",
                    self.family
                )));
            }
            if !v.is_finite() {
                return Err(Error::Validation(format!("parameter {name} is not finite")));
            }
        }
        let bad = |msg: String| Err(Error::Validation(msg));
        match self.family {
            Family::RandomForest => {
                if self.int_param("n_trees", 1)? == 0 {
                    return bad("n_trees must be at least 1".into());
                }
                let mtry = self.int_param("mtry", 1)?;
                if mtry == 0 || mtry > m.max(1) {
                    return bad(format!("mtry {mtry} outside [1, {m}]"));
                }
                if self.int_param("min_node_size", 1)? == 0 {
                    return bad("min_node_size must be at least 1".into());
                }
            }
            Family::LassoLogistic => {
                if self.param("lambda").unwrap_or(0.0) < 0.0 {
                    return bad("lambda must be non-negative".into());
                }
                self.int_param("max_iter", 1)?;
                if self.param("tol").is_some_and(|t| t <= 0.0) {
                    return bad("tol must be positive".into());
                }
            }
            Family::Logistic => {
                self.int_param("max_iter", 1)?;
                if self.param("tol").is_some_and(|t| t <= 0.0) {
                    return bad("tol must be positive".into());
                }
            }
            Family::NaiveBayes => {
                if self.param("var_floor").is_some_and(|t| t <= 0.0) {
                    return bad("var_floor must be positive".into());
                }
            }
            Family::Knn => {
                if self.param("k").is_some() && self.int_param("k", 1)? == 0 {
                    return bad("k must be at least 1".into());
                }
                if self.int_param("folds", 10)? < 2 {
                    return bad("folds must be at least 2".into());
                }
            }
            Family::Svm | Family::NeuralNet => {
                return Err(Error::NotImplemented(format!("{} classifier", self.family)));
            }
        }
        Ok(())
    }
}

/// Per-family fitted state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    Forest(Forest),
    Linear(LinearModel),
    NaiveBayes(NaiveBayesModel),
    Knn(KnnModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ClassifierSpec,
    pub columns: Vec<String>,
    pub fitted: FittedModel,
    /// False when an iterative solver stopped before meeting its tolerance.
    pub converged: bool,
    pub notes: Vec<String>,
}

fn check_training(x: &Matrix, y: &[bool]) -> Result<(usize, usize)> {
    if x.n_rows() != y.len() {
        return Err(Error::InvalidInput(format!(
            "{} rows but {} labels",
            x.n_rows(),
            y.len()
        )));
    }
    if x.rows().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite feature value".into()));
    }
    let pos = y.iter().filter(|&&l| l).count();
    Ok((pos, y.len() - pos))
}

fn require_both_classes(x: &Matrix, y: &[bool]) -> Result<()> {
    let (pos, neg) = check_training(x, y)?;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidInput(
            "training labels contain a single class".into(),
        ));
    }
    Ok(())
}

/// Rebalances per `spec.sampling`, then fits the spec's family.
pub fn fit(spec: &ClassifierSpec, x: &Matrix, y: &[bool], seed: u64) -> Result<TrainedModel> {
    spec.validate(x.n_cols())?;
    let (x, y) = resample(x, y, spec.sampling, seed)?;
    match spec.family {
        Family::RandomForest => fit_balanced_rf(&x, &y, spec, seed),
        Family::LassoLogistic => fit_lasso_logistic(&x, &y, spec),
        Family::Logistic => fit_logistic(&x, &y, spec),
        Family::NaiveBayes => fit_gaussian_nb(&x, &y, spec),
        Family::Knn => fit_knn(&x, &y, spec, seed),
        Family::Svm | Family::NeuralNet => {
            Err(Error::NotImplemented(format!("{} classifier", spec.family)))
        }
    }
}

/// One score in `[0, 1]` per row of `x`.
pub fn predict_scores(model: &TrainedModel, x: &Matrix) -> Result<Vec<f64>> {
    x.check_schema(&model.columns)?;
    let scores = match &model.fitted {
        FittedModel::Forest(f) => f.predict(x),
        FittedModel::Linear(l) => l.predict(x),
        FittedModel::NaiveBayes(nb) => nb.predict(x),
        FittedModel::Knn(k) => k.predict(x),
    };
    Ok(scores)
}

#[cfg(test)]
mod tests;
