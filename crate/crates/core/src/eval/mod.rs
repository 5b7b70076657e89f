//! Discrimination metrics and hyperparameter search.

mod auc;
mod bootstrap;
mod tuner;

pub use self::auc::auc;
pub(crate) use self::auc::has_both_classes;
pub use bootstrap::{bootstrap_sd, bootstrap_sd_with, Bootstrap, Resampling};
pub use tuner::{greedy_tune, ModelTrainer, ParamGrid, TuneStep, TuneTrace, Trainer, TunerConfig};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Validation AUC with its bootstrap standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub auc: f64,
    pub sd: f64,
    pub n_events: usize,
    pub n_nonevents: usize,
    pub n_replicates: usize,
}

/// AUC plus bootstrap SD over `n_replicates` pairs-resampled replicates.
pub fn evaluate(scores: &[f64], labels: &[bool], n_replicates: usize, seed: u64) -> Result<EvalResult> {
    let a = auc(scores, labels)?;
    let b = bootstrap_sd(scores, labels, n_replicates, seed)?;
    let n_events = labels.iter().filter(|&&l| l).count();
    Ok(EvalResult {
        auc: a,
        sd: b.sd,
        n_events,
        n_nonevents: labels.len() - n_events,
        n_replicates: b.replicates,
    })
}
