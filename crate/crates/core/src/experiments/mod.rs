//! Classifier screening, window sweeps and severity trajectories, with
//! their report tables.

mod report;
mod trajectory;

use std::collections::HashMap;

use rayon::prelude::*;

use crate::claims::{CodeMap, StudyConfig};
use crate::error::{Error, Result};
use crate::eval::{self, greedy_tune, ModelTrainer, ParamGrid, TuneTrace, TunerConfig};
use crate::features::{
    build_matrix, enumerate_window_splits, split_samples, Cohort, FeatureMatrix, SampleSplit,
    VariableSet, WindowSplit,
};
use crate::learners::{self, lambda_grid, ClassifierSpec, Family, Sampling};
use crate::matrix::Matrix;
use crate::seeds;

pub use report::{
    write_diff_csv, write_screening_csv, write_sweep_csv, write_trajectory_csv,
};
pub use trajectory::{compute_trajectory, DiffRow, Trajectory, TrajectoryRow};

/// One cell of a screening report.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningRow {
    pub cohort: String,
    pub family: Family,
    pub variable_set: VariableSet,
    pub spec: ClassifierSpec,
    pub eval: eval::EvalResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningReport {
    pub rows: Vec<ScreeningRow>,
    /// Tuning trace per row, same order.
    pub traces: Vec<TuneTrace>,
    pub split: SampleSplit,
}

impl ScreeningReport {
    pub fn row(&self, family: Family, variable_set: VariableSet) -> Option<&ScreeningRow> {
        self.rows
            .iter()
            .find(|r| r.family == family && r.variable_set == variable_set)
    }

    /// Highest-AUC row; the first in report order wins ties.
    pub fn best(&self) -> Option<&ScreeningRow> {
        self.rows
            .iter()
            .fold(None, |best: Option<&ScreeningRow>, r| match best {
                Some(b) if b.eval.auc >= r.eval.auc => Some(b),
                _ => Some(r),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningOptions {
    pub families: Vec<Family>,
    pub variable_sets: Vec<VariableSet>,
    pub sampling: Vec<Sampling>,
    /// Replaces the default candidate list of a family's parameter.
    pub grid_overrides: Vec<(Family, String, Vec<f64>)>,
    pub passes: usize,
    pub n_bootstrap: usize,
    /// Refit the tuned spec on training + tuning rows before validation
    /// scoring; when false the training-only fit is scored.
    pub refit_on_development: bool,
}

impl Default for ScreeningOptions {
    fn default() -> Self {
        ScreeningOptions {
            families: vec![Family::RandomForest, Family::LassoLogistic],
            variable_sets: vec![VariableSet::Traditional, VariableSet::Augmented],
            sampling: Sampling::ALL.to_vec(),
            grid_overrides: vec![],
            passes: 1,
            n_bootstrap: 1000,
            refit_on_development: true,
        }
    }
}

/// Default greedy grid for `family` on a training design.
pub fn default_grid(family: Family, train: &Matrix, labels: &[bool]) -> Result<ParamGrid> {
    let m = train.n_cols();
    Ok(match family {
        Family::RandomForest => {
            let r = (m as f64).sqrt();
            let mut mtry: Vec<f64> = Vec::new();
            for v in [(r / 2.0).floor(), r.floor(), (2.0 * r).floor()] {
                let v = v.clamp(1.0, m.max(1) as f64);
                if !mtry.contains(&v) {
                    mtry.push(v);
                }
            }
            vec![
                ("n_trees".into(), vec![200.0, 500.0, 1000.0]),
                ("mtry".into(), mtry),
                ("min_node_size".into(), vec![1.0, 5.0, 10.0]),
            ]
        }
        Family::LassoLogistic => vec![("lambda".into(), lambda_grid(train, labels, 20)?)],
        _ => vec![],
    })
}

/// Rows of `fm` belonging to `ids`, in the given order.
fn take(fm: &FeatureMatrix, index: &HashMap<&str, usize>, ids: &[String]) -> (Matrix, Vec<bool>) {
    let rows: Vec<usize> = ids.iter().map(|id| index[id.as_str()]).collect();
    let labels = rows.iter().map(|&i| fm.labels[i]).collect();
    (fm.matrix.select_rows(&rows), labels)
}

/// Design matrices for the four samples of a split.
struct Partitioned {
    train: (Matrix, Vec<bool>),
    tune: (Matrix, Vec<bool>),
    development: (Matrix, Vec<bool>),
    validation: (Matrix, Vec<bool>),
}

fn partition(fm: &FeatureMatrix, split: &SampleSplit) -> Result<Partitioned> {
    let index: HashMap<&str, usize> = fm.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    for id in split.development_ids.iter().chain(&split.validation_ids) {
        if !index.contains_key(id.as_str()) {
            return Err(Error::InvalidInput(format!("split id {id} is not in the cohort")));
        }
    }
    let parts = Partitioned {
        train: take(fm, &index, &split.training_ids),
        tune: take(fm, &index, &split.tuning_ids),
        development: take(fm, &index, &split.development_ids),
        validation: take(fm, &index, &split.validation_ids),
    };
    for (name, labels) in [
        ("training", &parts.train.1),
        ("tuning", &parts.tune.1),
        ("validation", &parts.validation.1),
    ] {
        if !eval::has_both_classes(labels) {
            return Err(Error::Validation(format!(
                "cohort {}: {name} sample has a single outcome class",
                fm.cohort
            )));
        }
    }
    Ok(parts)
}

/// The split shared by every experiment on a cohort for a given seed.
pub fn cohort_split(cohort: &Cohort, seed: u64) -> Result<SampleSplit> {
    split_samples(&cohort.ids(), seeds::derive(seed, seeds::tag("split")))
}

fn fit_and_evaluate(
    spec: &ClassifierSpec,
    fit_on: &(Matrix, Vec<bool>),
    validation: &(Matrix, Vec<bool>),
    n_bootstrap: usize,
    seed: u64,
) -> Result<(ClassifierSpec, eval::EvalResult)> {
    let model = learners::fit(spec, &fit_on.0, &fit_on.1, seed)?;
    for note in &model.notes {
        log::info!("{} fit: {note}", spec.family);
    }
    let scores = learners::predict_scores(&model, &validation.0)?;
    let result = eval::evaluate(
        &scores,
        &validation.1,
        n_bootstrap,
        seeds::derive(seed, seeds::tag("bootstrap")),
    )?;
    // the fitted spec records resolved defaults such as mtry or knn's k
    let mut resolved = model.spec;
    resolved.sampling = spec.sampling;
    Ok((resolved, result))
}

/// Tunes, refits and validates every (family, variable set) cell of one
/// cohort on a single shared sample split.
pub fn run_screening(
    cohort: &Cohort,
    code_map: &CodeMap,
    config: &StudyConfig,
    options: &ScreeningOptions,
    seed: u64,
) -> Result<ScreeningReport> {
    let split = cohort_split(cohort, seed)?;
    let mut matrices = Vec::new();
    for &vs in &options.variable_sets {
        let fm = build_matrix(cohort, code_map, config, vs, WindowSplit::PRIMARY)?;
        matrices.push((vs, partition(&fm, &split)?));
    }
    let mut cells: Vec<(Family, VariableSet, &Partitioned)> = Vec::new();
    for &family in &options.families {
        for (vs, parts) in &matrices {
            cells.push((family, *vs, parts));
        }
    }
    cells.sort_by_key(|c| (c.0.as_str(), c.1.as_str()));

    let results: Vec<(ScreeningRow, TuneTrace)> = cells
        .par_iter()
        .map(|&(family, vs, parts)| {
            let cell_seed = seeds::derive(
                seed,
                seeds::tag(&format!("{}/{}/{}", cohort.name, family, vs)),
            );
            let mut grid = default_grid(family, &parts.train.0, &parts.train.1)?;
            for (f, name, values) in &options.grid_overrides {
                if *f != family {
                    continue;
                }
                match grid.iter_mut().find(|(n, _)| n == name) {
                    Some(slot) => slot.1 = values.clone(),
                    None => grid.push((name.clone(), values.clone())),
                }
            }
            let tuner = TunerConfig {
                grid,
                sampling: options.sampling.clone(),
                passes: options.passes,
            };
            let (spec, trace) = greedy_tune(
                &ClassifierSpec::new(family),
                &tuner,
                &parts.train.0,
                &parts.train.1,
                &parts.tune.0,
                &parts.tune.1,
                cell_seed,
                &ModelTrainer,
            )?;
            let fit_on = if options.refit_on_development {
                &parts.development
            } else {
                &parts.train
            };
            let (spec, eval) =
                fit_and_evaluate(&spec, fit_on, &parts.validation, options.n_bootstrap, cell_seed)?;
            Ok((
                ScreeningRow {
                    cohort: cohort.name.clone(),
                    family,
                    variable_set: vs,
                    spec,
                    eval,
                },
                trace,
            ))
        })
        .collect::<Result<_>>()?;
    let (rows, traces) = results.into_iter().unzip();
    Ok(ScreeningReport { rows, traces, split })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub cohort: String,
    pub split: WindowSplit,
    pub eval: eval::EvalResult,
}

/// Refits `spec` on the augmented set of every window split, reusing the
/// cohort's sample split. Rows are ordered by boundary, no-split last.
pub fn run_window_sweep(
    cohort: &Cohort,
    code_map: &CodeMap,
    config: &StudyConfig,
    spec: &ClassifierSpec,
    n_bootstrap: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let split = cohort_split(cohort, seed)?;
    let fit_seed = seeds::derive(seed, seeds::tag(&format!("{}/sweep", cohort.name)));
    let mut splits = enumerate_window_splits();
    splits.sort_by_key(|s| s.boundary().unwrap_or(u32::MAX));
    splits
        .par_iter()
        .map(|&ws| {
            let fm = build_matrix(cohort, code_map, config, VariableSet::Augmented, ws)?;
            let parts = partition(&fm, &split)?;
            let (_, eval) =
                fit_and_evaluate(spec, &parts.development, &parts.validation, n_bootstrap, fit_seed)?;
            Ok(SweepRow {
                cohort: cohort.name.clone(),
                split: ws,
                eval,
            })
        })
        .collect()
}

/// Boundary of the highest-AUC row (None = the no-split set); the
/// first row wins ties.
pub fn best_boundary(rows: &[SweepRow]) -> Option<Option<u32>> {
    let mut best: Option<&SweepRow> = None;
    for r in rows {
        if best.is_none_or(|b| r.eval.auc > b.eval.auc) {
            best = Some(r);
        }
    }
    best.map(|r| r.split.boundary())
}
