//! Greedy one-parameter-at-a-time search.
//!
//! Parameters are visited in grid order. Each candidate is fitted on the
//! training rows with every other parameter held at its current best value
//! and scored by AUC on the tuning rows; the best candidate is kept before
//! moving on. The sampling option is tuned last. Ties go to the candidate
//! listed first, and a failed fit is recorded with a NaN score.

use std::io::Write;

use crate::error::{Error, Result};
use crate::learners::{self, ClassifierSpec, Sampling};
use crate::matrix::Matrix;

use super::auc::auc;

/// Fits a spec on training rows and scores evaluation rows.
pub trait Trainer: Sync {
    fn fit_predict(
        &self,
        spec: &ClassifierSpec,
        train: &Matrix,
        train_labels: &[bool],
        eval: &Matrix,
        seed: u64,
    ) -> Result<Vec<f64>>;
}

/// The standard trainer: [`learners::fit`] followed by [`learners::predict_scores`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ModelTrainer;

impl Trainer for ModelTrainer {
    fn fit_predict(
        &self,
        spec: &ClassifierSpec,
        train: &Matrix,
        train_labels: &[bool],
        eval: &Matrix,
        seed: u64,
    ) -> Result<Vec<f64>> {
        let model = learners::fit(spec, train, train_labels, seed)?;
        learners::predict_scores(&model, eval)
    }
}

/// Ordered candidate values per parameter.
pub type ParamGrid = Vec<(String, Vec<f64>)>;

#[derive(Debug, Clone, PartialEq)]
pub struct TunerConfig {
    pub grid: ParamGrid,
    pub sampling: Vec<Sampling>,
    /// Number of passes over the parameter list.
    pub passes: usize,
}

impl TunerConfig {
    pub fn new(grid: ParamGrid) -> Self {
        TunerConfig {
            grid,
            sampling: Sampling::ALL.to_vec(),
            passes: 1,
        }
    }

    pub fn without_sampling(mut self) -> Self {
        self.sampling.clear();
        self
    }

    /// Fits performed by [`greedy_tune`] under this configuration.
    pub fn fit_count(&self) -> usize {
        self.passes * (self.grid.iter().map(|(_, c)| c.len()).sum::<usize>() + self.sampling.len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneStep {
    pub step: usize,
    pub param: String,
    pub candidate: String,
    pub auc: f64,
    pub chosen: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TuneTrace {
    pub steps: Vec<TuneStep>,
}

impl TuneTrace {
    pub fn fits(&self) -> usize {
        self.steps.len()
    }

    /// CSV with header `step,param,candidate,auc,chosen`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["step", "param", "candidate", "auc", "chosen"])?;
        for s in &self.steps {
            out.write_record([
                s.step.to_string(),
                s.param.clone(),
                s.candidate.clone(),
                format!("{:.6}", s.auc),
                s.chosen.to_string(),
            ])?;
        }
        out.flush().map_err(|e| Error::io("tune trace", e))
    }
}

/// Index of the best finite score; first wins ties.
fn argmax(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if s.is_nan() {
            continue;
        }
        if best.is_none_or(|b| s > scores[b]) {
            best = Some(i);
        }
    }
    best
}

fn score(
    trainer: &dyn Trainer,
    spec: &ClassifierSpec,
    data: (&Matrix, &[bool], &Matrix, &[bool]),
    seed: u64,
) -> f64 {
    let (train, train_y, tune, tune_y) = data;
    let result = trainer
        .fit_predict(spec, train, train_y, tune, seed)
        .and_then(|s| auc(&s, tune_y));
    match result {
        Ok(a) => a,
        Err(e) => {
            log::warn!("tuning fit failed for {} [{}]: {e}", spec.family, spec.params_string());
            f64::NAN
        }
    }
}

/// Greedy search starting from `base`. Returns the tuned spec and the trace
/// of every fit. Fails only when every candidate of some step fails.
#[allow(clippy::too_many_arguments)]
pub fn greedy_tune(
    base: &ClassifierSpec,
    config: &TunerConfig,
    train: &Matrix,
    train_labels: &[bool],
    tune: &Matrix,
    tune_labels: &[bool],
    seed: u64,
    trainer: &dyn Trainer,
) -> Result<(ClassifierSpec, TuneTrace)> {
    let data = (train, train_labels, tune, tune_labels);
    let mut best = base.clone();
    let mut trace = TuneTrace::default();
    let mut step = 0;
    for _ in 0..config.passes {
        for (param, candidates) in &config.grid {
            if candidates.is_empty() {
                continue;
            }
            let specs: Vec<ClassifierSpec> = candidates
                .iter()
                .map(|&v| best.clone().with_param(param, v))
                .collect();
            let aucs: Vec<f64> = specs.iter().map(|s| score(trainer, s, data, seed)).collect();
            let pick = argmax(&aucs).ok_or_else(|| {
                Error::InvalidInput(format!("every candidate for {param} failed to fit"))
            })?;
            for (i, (&v, &a)) in candidates.iter().zip(&aucs).enumerate() {
                trace.steps.push(TuneStep {
                    step,
                    param: param.clone(),
                    candidate: format!("{v}"),
                    auc: a,
                    chosen: i == pick,
                });
            }
            best = specs[pick].clone();
            step += 1;
        }
        if !config.sampling.is_empty() {
            let specs: Vec<ClassifierSpec> = config
                .sampling
                .iter()
                .map(|&s| best.clone().with_sampling(s))
                .collect();
            let aucs: Vec<f64> = specs.iter().map(|s| score(trainer, s, data, seed)).collect();
            let pick = argmax(&aucs).ok_or_else(|| {
                Error::InvalidInput("every sampling option failed to fit".into())
            })?;
            for (i, (s, &a)) in config.sampling.iter().zip(&aucs).enumerate() {
                trace.steps.push(TuneStep {
                    step,
                    param: "sampling".into(),
                    candidate: s.to_string(),
                    auc: a,
                    chosen: i == pick,
                });
            }
            best = specs[pick].clone();
            step += 1;
        }
    }
    Ok((best, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::Family;

    /// Scores one positive against `n` negatives so that the tuning AUC
    /// equals a chosen fraction `k / n`, with `k` an additive function of
    /// the parameters.
    struct Stub {
        n: usize,
        surface: fn(&ClassifierSpec) -> usize,
    }

    impl Trainer for Stub {
        fn fit_predict(
            &self,
            spec: &ClassifierSpec,
            _: &Matrix,
            _: &[bool],
            eval: &Matrix,
            _: u64,
        ) -> Result<Vec<f64>> {
            if spec.param("fail") == Some(1.0) {
                return Err(Error::InvalidInput("forced".into()));
            }
            let k = (self.surface)(spec).min(self.n);
            // row 0 is the positive; it outranks exactly k negatives
            let mut s = vec![0.0; eval.n_rows()];
            s[0] = k as f64 - 0.5;
            for (i, v) in s.iter_mut().enumerate().skip(1) {
                *v = (i - 1) as f64;
            }
            Ok(s)
        }
    }

    fn data(n: usize) -> (Matrix, Vec<bool>) {
        let x = Matrix::unnamed(1, &vec![vec![0.0]; n + 1]).unwrap();
        let mut y = vec![false; n + 1];
        y[0] = true;
        (x, y)
    }

    fn additive(spec: &ClassifierSpec) -> usize {
        let a = spec.param("a").unwrap_or(0.0) as usize;
        let b = spec.param("b").unwrap_or(0.0) as usize;
        let s = match spec.sampling {
            Sampling::None => 0,
            Sampling::Up => 2,
            Sampling::Down => 1,
        };
        [0, 3, 1][a] + [2, 0, 5][b] + s
    }

    fn grid() -> ParamGrid {
        vec![
            ("a".into(), vec![0.0, 1.0, 2.0]),
            ("b".into(), vec![0.0, 1.0, 2.0]),
        ]
    }

    #[test]
    fn additive_surface_reaches_the_joint_optimum() {
        let (x, y) = data(20);
        let stub = Stub { n: 20, surface: additive };
        let cfg = TunerConfig::new(grid());
        let (best, trace) = greedy_tune(&ClassifierSpec::new(Family::Logistic), &cfg, &x, &y, &x, &y, 0, &stub).unwrap();
        assert_eq!(best.param("a"), Some(1.0));
        assert_eq!(best.param("b"), Some(2.0));
        assert_eq!(best.sampling, Sampling::Up);
        assert_eq!(trace.fits(), cfg.fit_count());
        assert_eq!(trace.fits(), 9);
        let chosen: Vec<&TuneStep> = trace.steps.iter().filter(|s| s.chosen).collect();
        assert_eq!(chosen.len(), 3);
        assert!((chosen[2].auc - 10.0 / 20.0).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_first_candidate() {
        let (x, y) = data(10);
        let stub = Stub { n: 10, surface: |_| 4 };
        let cfg = TunerConfig::new(grid());
        let (best, _) = greedy_tune(&ClassifierSpec::new(Family::Logistic), &cfg, &x, &y, &x, &y, 0, &stub).unwrap();
        assert_eq!(best.param("a"), Some(0.0));
        assert_eq!(best.param("b"), Some(0.0));
        assert_eq!(best.sampling, Sampling::None);
    }

    #[test]
    fn failed_fits_are_skipped() {
        let (x, y) = data(10);
        let stub = Stub { n: 10, surface: |s| s.param("fail").map_or(0, |v| v as usize) };
        let cfg = TunerConfig::new(vec![("fail".into(), vec![1.0, 0.0, 2.0])]).without_sampling();
        let (best, trace) = greedy_tune(&ClassifierSpec::new(Family::Logistic), &cfg, &x, &y, &x, &y, 0, &stub).unwrap();
        assert_eq!(best.param("fail"), Some(2.0));
        assert!(trace.steps[0].auc.is_nan());

        let all_fail = TunerConfig::new(vec![("fail".into(), vec![1.0])]).without_sampling();
        assert!(greedy_tune(&ClassifierSpec::new(Family::Logistic), &all_fail, &x, &y, &x, &y, 0, &stub).is_err());
    }

    #[test]
    fn trace_csv_layout() {
        let (x, y) = data(4);
        let stub = Stub { n: 4, surface: additive };
        let cfg = TunerConfig::new(vec![("a".into(), vec![0.0, 1.0])]).without_sampling();
        let (_, trace) = greedy_tune(&ClassifierSpec::new(Family::Logistic), &cfg, &x, &y, &x, &y, 0, &stub).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,param,candidate,auc,chosen");
        assert_eq!(lines[1], "0,a,0,0.500000,false");
        assert_eq!(lines[2], "0,a,1,1.000000,true");
    }
}
